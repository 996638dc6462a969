//! GAP-compatible tab-separated format for pronoun/candidate instances.
//!
//! Columns: ID, Text, Pronoun, Pronoun-offset, A, A-offset, A-coref,
//! B, B-offset, B-coref, URL. Offsets are character offsets into Text.

use crate::corpus::tokenize::tokenize;
use crate::corpus::{MapInstance, MentionSpan, Token};
use crate::error::{Error, Result};

pub const MAP_HEADER: [&str; 11] = [
    "ID",
    "Text",
    "Pronoun",
    "Pronoun-offset",
    "A",
    "A-offset",
    "A-coref",
    "B",
    "B-offset",
    "B-coref",
    "URL",
];

/// Parses instances from the tab-separated text.
pub fn parse_map(text: &str) -> Result<Vec<MapInstance>> {
    // Plain TSV: no quoting, so dialogue quotes in Text pass through verbatim.
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(false)
        .from_reader(text.as_bytes());

    let headers = reader.headers()?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != MAP_HEADER {
        return Err(Error::Invalid(format!(
            "header mismatch: expected {:?}, found {:?}",
            MAP_HEADER.join("\t"),
            found.join("\t")
        )));
    }

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let id = record.get(0).unwrap_or("").to_string();
        let row_id = if id.is_empty() { format!("#{}", out.len() + 2) } else { id.clone() };
        let instance = parse_row(&row_id, &record)?;
        out.push(instance);
    }
    Ok(out)
}

fn parse_row(row_id: &str, record: &csv::StringRecord) -> Result<MapInstance> {
    let field = |i: usize| record.get(i).unwrap_or("");
    let text = field(1);
    let (tokens, ranges) = tokenize(text);

    let pronoun = field(2);
    let pronoun_offset = parse_offset(row_id, "Pronoun-offset", field(3))?;
    let pronoun_span = locate_span(row_id, &tokens, &ranges, pronoun, pronoun_offset)?;
    if pronoun_span.len() != 1 {
        return Err(Error::row(row_id, format!("pronoun {pronoun:?} is not a single token")));
    }
    let at = &tokens[pronoun_span.start].surface;
    if at != pronoun {
        return Err(Error::row(
            row_id,
            format!("pronoun column {pronoun:?} does not match text at offset ({at:?})"),
        ));
    }

    let a_span = locate_span(row_id, &tokens, &ranges, field(4), parse_offset(row_id, "A-offset", field(5))?)?;
    let b_span = locate_span(row_id, &tokens, &ranges, field(7), parse_offset(row_id, "B-offset", field(8))?)?;

    let a_is_coref = parse_bool(row_id, "A-coref", field(6))?;
    let b_is_coref = parse_bool(row_id, "B-coref", field(9))?;
    if a_is_coref && b_is_coref {
        return Err(Error::row(row_id, "both A-coref and B-coref are TRUE"));
    }

    let instance = MapInstance {
        instance_id: field(0).to_string(),
        tokens,
        pronoun_span,
        candidate_a_span: a_span,
        candidate_b_span: b_span,
        a_is_coref,
        b_is_coref,
        source_url: field(10).to_string(),
    };
    instance.validate()?;
    Ok(instance)
}

fn parse_offset(row_id: &str, col: &str, s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::row(row_id, format!("{col}: expected a character offset, found {s:?}")))
}

fn parse_bool(row_id: &str, col: &str, s: &str) -> Result<bool> {
    match s.trim().to_ascii_uppercase().as_str() {
        "TRUE" => Ok(true),
        "FALSE" => Ok(false),
        other => Err(Error::row(row_id, format!("{col}: expected TRUE or FALSE, found {other:?}"))),
    }
}

/// Converts a character span (offset, offset+len of `surface`) to a token
/// span. The end may fall before a possessive clitic on the final token
/// ("Bobbitt's" with surface "Bobbitt"), which the span then covers whole.
fn locate_span(
    row_id: &str,
    tokens: &[Token],
    ranges: &[std::ops::Range<usize>],
    surface: &str,
    offset: usize,
) -> Result<MentionSpan> {
    let start = ranges
        .iter()
        .position(|r| r.start == offset)
        .ok_or_else(|| Error::row(row_id, format!("offset {offset} is not on a token boundary")))?;
    let end_char = offset + surface.chars().count();
    for (i, r) in ranges.iter().enumerate().skip(start) {
        if r.end == end_char {
            return Ok(MentionSpan::new(start, i + 1, None));
        }
        if r.start < end_char && end_char < r.end {
            let tail: String = tokens[i]
                .surface
                .chars()
                .skip(end_char - r.start)
                .collect();
            if is_possessive_clitic(&tail) {
                return Ok(MentionSpan::new(start, i + 1, None));
            }
            return Err(Error::row(
                row_id,
                format!("span for {surface:?} ends mid-token inside {:?}", tokens[i].surface),
            ));
        }
    }
    Err(Error::row(row_id, format!("span for {surface:?} at offset {offset} runs past the text")))
}

fn is_possessive_clitic(tail: &str) -> bool {
    matches!(tail, "'s" | "'" | "\u{2019}s" | "\u{2019}")
}

/// Strips a possessive clitic from a rendered span when the underlying
/// name did not include it.
pub fn strip_clitic(s: &str) -> &str {
    for clitic in ["'s", "\u{2019}s"] {
        if let Some(stripped) = s.strip_suffix(clitic) {
            return stripped;
        }
    }
    if let Some(stripped) = s.strip_suffix('\'').or_else(|| s.strip_suffix('\u{2019}')) {
        return stripped;
    }
    s
}

/// Emits instances in the tab-separated layout; inverse of [`parse_map`]
/// for tokens, spans, and flags.
pub fn emit_map(instances: &[MapInstance]) -> String {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(Vec::new());
    writer.write_record(MAP_HEADER).expect("in-memory write");
    for inst in instances {
        let text = inst.text();
        let char_starts = token_char_starts(&inst.tokens);
        let span_surface = |span: &MentionSpan| strip_clitic(&inst.span_text(span)).to_string();
        let offset = |span: &MentionSpan| char_starts[span.start].to_string();
        writer
            .write_record([
                inst.instance_id.as_str(),
                text.as_str(),
                &inst.span_text(&inst.pronoun_span),
                &offset(&inst.pronoun_span),
                &span_surface(&inst.candidate_a_span),
                &offset(&inst.candidate_a_span),
                if inst.a_is_coref { "TRUE" } else { "FALSE" },
                &span_surface(&inst.candidate_b_span),
                &offset(&inst.candidate_b_span),
                if inst.b_is_coref { "TRUE" } else { "FALSE" },
                inst.source_url.as_str(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf8")
}

fn token_char_starts(tokens: &[Token]) -> Vec<usize> {
    let mut starts = Vec::with_capacity(tokens.len());
    let mut pos = 0;
    for (i, tok) in tokens.iter().enumerate() {
        starts.push(pos);
        pos += tok.surface.chars().count();
        if tok.trailing_space && i + 1 < tokens.len() {
            pos += 1;
        }
    }
    starts
}
