//! CoNLL-2012 coreference format: `#begin document` / `#end document`
//! sentinels, one token per line, coreference markers in the last column.
//!
//! Accepted data-line layouts:
//!   * full or reduced CoNLL-2012 (>= 5 columns): word in column 3,
//!     part-of-speech in column 4, coreference in the last column;
//!   * minimal 3-column `word_no word coref`.
//!
//! Gold annotations may flag a mention as an incorrect reference
//! (misgendering or deadnaming) by suffixing the cluster id with `!`,
//! e.g. `(12!` ... `12)` or `(12!)`. Standard files never contain the
//! marker, so the extension is backward compatible.

use std::collections::BTreeMap;

use crate::corpus::{Document, Genre, MentionSpan, Token};
use crate::error::{Error, Result};

const SENTENCE_LENGTHS_KEY: &str = "sentence_token_counts";

struct OpenMention {
    entity_id: u32,
    start: usize,
    line: usize,
    incorrect: bool,
}

/// Parses one or more documents from CoNLL text.
pub fn parse_conll(text: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut current: Option<DocBuilder> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if let Some(rest) = line.strip_prefix("#begin document") {
            if current.is_some() {
                return Err(Error::format(line_no, "#begin document while a document is open"));
            }
            current = Some(DocBuilder::new(parse_begin_header(rest), line_no));
            continue;
        }
        if line.starts_with("#end document") {
            let builder = current
                .take()
                .ok_or_else(|| Error::format(line_no, "#end document without #begin document"))?;
            docs.push(builder.finish(line_no)?);
            continue;
        }
        if line.starts_with('#') {
            continue; // other comment lines
        }
        if line.trim().is_empty() {
            if let Some(b) = current.as_mut() {
                b.end_sentence();
            }
            continue;
        }
        let builder = current
            .as_mut()
            .ok_or_else(|| Error::format(line_no, "token line outside #begin/#end document"))?;
        builder.push_line(line, line_no)?;
    }

    if let Some(b) = current {
        return Err(Error::format(b.begin_line, "missing #end document sentinel"));
    }
    Ok(docs)
}

fn parse_begin_header(rest: &str) -> (String, Option<String>) {
    // "#begin document (id); part 000"
    let rest = rest.trim();
    let mut doc_id = rest.to_string();
    let mut part = None;
    if let Some(open) = rest.find('(') {
        if let Some(close) = rest[open..].find(')') {
            doc_id = rest[open + 1..open + close].to_string();
            let tail = &rest[open + close + 1..];
            if let Some(p) = tail.trim().trim_start_matches(';').trim().strip_prefix("part") {
                part = Some(p.trim().to_string());
            }
        }
    }
    if doc_id.is_empty() {
        doc_id = "unnamed".to_string();
    }
    (doc_id, part)
}

struct DocBuilder {
    doc_id: String,
    part: Option<String>,
    begin_line: usize,
    tokens: Vec<Token>,
    mentions: Vec<MentionSpan>,
    open: BTreeMap<u32, Vec<OpenMention>>,
    sentence_lengths: Vec<usize>,
    current_sentence: usize,
}

impl DocBuilder {
    fn new((doc_id, part): (String, Option<String>), begin_line: usize) -> Self {
        DocBuilder {
            doc_id,
            part,
            begin_line,
            tokens: Vec::new(),
            mentions: Vec::new(),
            open: BTreeMap::new(),
            sentence_lengths: Vec::new(),
            current_sentence: 0,
        }
    }

    fn end_sentence(&mut self) {
        if self.current_sentence > 0 {
            self.sentence_lengths.push(self.current_sentence);
            self.current_sentence = 0;
        }
    }

    fn push_line(&mut self, line: &str, line_no: usize) -> Result<()> {
        let cols: Vec<&str> = line.split_whitespace().collect();
        let (word, pos) = match cols.len() {
            0..=2 => {
                return Err(Error::format(
                    line_no,
                    format!("expected at least 3 columns, found {}", cols.len()),
                ))
            }
            3 | 4 => (cols[1], None),
            _ => (cols[3], Some(cols[4]).filter(|p| *p != "-" && *p != "*")),
        };
        let coref = *cols.last().expect("non-empty columns");

        let token_index = self.tokens.len();
        self.tokens.push(Token {
            index: token_index,
            surface: word.to_string(),
            pos_tag: pos.map(str::to_string),
            trailing_space: true,
        });
        self.current_sentence += 1;
        self.parse_coref_column(coref, token_index, line_no)
    }

    fn parse_coref_column(&mut self, col: &str, token_index: usize, line_no: usize) -> Result<()> {
        if col == "-" || col == "_" {
            return Ok(());
        }
        for item in col.split('|') {
            let item = item.trim();
            if item.is_empty() {
                return Err(Error::format(line_no, "empty coreference item"));
            }
            let opens = item.starts_with('(');
            let closes = item.ends_with(')');
            let core = item.trim_start_matches('(').trim_end_matches(')');
            let (id_str, incorrect) = match core.strip_suffix('!') {
                Some(s) => (s, true),
                None => (core, false),
            };
            let entity_id: u32 = id_str.parse().map_err(|_| {
                Error::format(line_no, format!("malformed cluster id {item:?}"))
            })?;
            match (opens, closes) {
                (true, true) => {
                    let mut m = MentionSpan::new(token_index, token_index + 1, Some(entity_id));
                    m.incorrect_reference = incorrect;
                    self.mentions.push(m);
                }
                (true, false) => {
                    self.open.entry(entity_id).or_default().push(OpenMention {
                        entity_id,
                        start: token_index,
                        line: line_no,
                        incorrect,
                    });
                }
                (false, true) => {
                    let stack = self.open.get_mut(&entity_id);
                    let open = stack.and_then(|s| s.pop()).ok_or_else(|| {
                        Error::format(
                            line_no,
                            format!("cluster {entity_id} closed without a matching open bracket"),
                        )
                    })?;
                    let mut m =
                        MentionSpan::new(open.start, token_index + 1, Some(open.entity_id));
                    m.incorrect_reference = open.incorrect || incorrect;
                    self.mentions.push(m);
                }
                (false, false) => {
                    return Err(Error::format(
                        line_no,
                        format!("coreference item {item:?} has neither open nor close bracket"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn finish(mut self, end_line: usize) -> Result<Document> {
        if let Some((id, open)) = self
            .open
            .iter()
            .find_map(|(id, s)| s.first().map(|m| (*id, m.line)))
        {
            return Err(Error::format(
                open,
                format!("cluster {id} opened here is never closed (document ends at line {end_line})"),
            ));
        }
        self.end_sentence();
        if let Some(last) = self.tokens.last_mut() {
            last.trailing_space = false;
        }
        self.mentions.sort();
        let mut doc = Document {
            genre: Genre::from_doc_id(&self.doc_id),
            doc_id: self.doc_id,
            tokens: self.tokens,
            mentions: self.mentions,
            metadata: BTreeMap::new(),
        };
        if let Some(part) = self.part {
            doc.metadata.insert("part".into(), part);
        }
        if !self.sentence_lengths.is_empty() {
            doc.metadata.insert(
                SENTENCE_LENGTHS_KEY.into(),
                self.sentence_lengths
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(" "),
            );
        }
        doc.validate()?;
        Ok(doc)
    }
}

/// Emits a document in a 12-column CoNLL-2012 layout.
pub fn emit_conll(doc: &Document) -> String {
    let part = doc.metadata.get("part").map(String::as_str).unwrap_or("000");
    let mut out = format!("#begin document ({}); part {}\n", doc.doc_id, part);

    let mut opens: BTreeMap<usize, Vec<&MentionSpan>> = BTreeMap::new();
    let mut closes: BTreeMap<usize, Vec<&MentionSpan>> = BTreeMap::new();
    let mut singles: BTreeMap<usize, Vec<&MentionSpan>> = BTreeMap::new();
    for m in &doc.mentions {
        if m.entity_id.is_none() || m.is_empty() || m.end > doc.tokens.len() {
            continue;
        }
        if m.len() == 1 {
            singles.entry(m.start).or_default().push(m);
        } else {
            opens.entry(m.start).or_default().push(m);
            closes.entry(m.end - 1).or_default().push(m);
        }
    }
    // Wider mentions open first so that brackets nest.
    for v in opens.values_mut() {
        v.sort_by_key(|m| std::cmp::Reverse(m.end));
    }
    for v in closes.values_mut() {
        v.sort_by_key(|m| std::cmp::Reverse(m.start)); // inner mentions close first
    }

    let sentence_lengths = sentence_plan(doc);
    let mut tok_iter = doc.tokens.iter();
    for len in sentence_lengths {
        for word_no in 0..len {
            let tok = tok_iter.next().expect("sentence plan covers all tokens");
            let mut items: Vec<String> = Vec::new();
            for m in opens.get(&tok.index).into_iter().flatten() {
                items.push(format!("({}{}", m.entity_id.unwrap(), flag(m)));
            }
            for m in singles.get(&tok.index).into_iter().flatten() {
                items.push(format!("({}{})", m.entity_id.unwrap(), flag(m)));
            }
            for m in closes.get(&tok.index).into_iter().flatten() {
                items.push(format!("{})", m.entity_id.unwrap()));
            }
            let coref = if items.is_empty() { "-".to_string() } else { items.join("|") };
            let pos = tok.pos_tag.as_deref().unwrap_or("-");
            out.push_str(&format!(
                "{} {} {} {} {} - - - - - * {}\n",
                doc.doc_id, part, word_no, tok.surface, pos, coref
            ));
        }
        out.push('\n');
    }
    out.push_str("#end document\n");
    out
}

fn flag(m: &MentionSpan) -> &'static str {
    if m.incorrect_reference {
        "!"
    } else {
        ""
    }
}

fn sentence_plan(doc: &Document) -> Vec<usize> {
    if let Some(v) = doc.metadata.get(SENTENCE_LENGTHS_KEY) {
        let lens: Vec<usize> = v.split_whitespace().filter_map(|s| s.parse().ok()).collect();
        if lens.iter().sum::<usize>() == doc.tokens.len() && !lens.is_empty() {
            return lens;
        }
    }
    if doc.tokens.is_empty() {
        Vec::new()
    } else {
        vec![doc.tokens.len()]
    }
}

/// Emits several documents into one stream.
pub fn emit_conll_all(docs: &[Document]) -> String {
    docs.iter().map(emit_conll).collect()
}

/// Metadata key under which parsed sentence boundaries are stashed; token
/// edits invalidate the stored plan and should remove it.
pub const SENTENCE_LENGTHS_METADATA_KEY: &str = SENTENCE_LENGTHS_KEY;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_token_mention() {
        let text = "#begin document (t); part 000\nt 000 0 Word NN - - - - - * (0)\n\n#end document\n";
        let docs = parse_conll(text).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].mentions, vec![MentionSpan::new(0, 1, Some(0))]);
    }

    #[test]
    fn multi_token_mention_spans_open_to_close() {
        let text = "#begin document (t); part 000\n\
                    t 000 0 The DT - - - - - * (0\n\
                    t 000 1 tall JJ - - - - - * -\n\
                    t 000 2 one NN - - - - - * 0)\n\
                    \n#end document\n";
        let docs = parse_conll(text).unwrap();
        assert_eq!(docs[0].mentions, vec![MentionSpan::new(0, 3, Some(0))]);
    }

    #[test]
    fn minimal_three_column_layout() {
        let text = "#begin document (mini)\n0 Hello (2\n1 world 2)\n#end document\n";
        let doc = &parse_conll(text).unwrap()[0];
        let surfaces: Vec<&str> = doc.tokens.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(surfaces, vec!["Hello", "world"]);
        assert_eq!(doc.mentions, vec![MentionSpan::new(0, 2, Some(2))]);
    }

    #[test]
    fn close_without_open_reports_line() {
        let text = "#begin document (t); part 000\nt 000 0 Word NN - - - - - * 0)\n#end document\n";
        let err = parse_conll(text).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err}");
    }

    #[test]
    fn unbalanced_open_reports_line() {
        let text = "#begin document (t); part 000\nt 000 0 Word NN - - - - - * (3\n#end document\n";
        let err = parse_conll(text).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err}");
    }

    #[test]
    fn missing_end_sentinel() {
        let text = "#begin document (t); part 000\nt 000 0 Word NN - - - - - * -\n";
        assert!(parse_conll(text).is_err());
    }

    #[test]
    fn nested_mentions_round_trip() {
        let mut doc = Document::new(
            "nested",
            vec![Token::new(0, "a"), Token::new(1, "b"), Token::new(2, "c")],
            vec![MentionSpan::new(0, 3, Some(0)), MentionSpan::new(1, 2, Some(1))],
        );
        doc.tokens[2].trailing_space = false;
        let emitted = emit_conll(&doc);
        assert!(emitted.contains("(0"), "{emitted}");
        assert!(emitted.contains("(1)"), "{emitted}");
        assert!(emitted.contains("0)"), "{emitted}");
        let back = parse_conll(&emitted).unwrap();
        assert_eq!(back[0].mentions, doc.mentions);
        assert_eq!(back[0].tokens, doc.tokens);
    }

    #[test]
    fn empty_document_is_sentinels_only() {
        let doc = Document::new("empty", vec![], vec![]);
        let emitted = emit_conll(&doc);
        assert_eq!(emitted, "#begin document (empty); part 000\n#end document\n");
        let back = parse_conll(&emitted).unwrap();
        assert!(back[0].tokens.is_empty());
    }

    #[test]
    fn incorrect_reference_flag_round_trips() {
        let mut doc = Document::new(
            "flags",
            vec![Token::new(0, "Dana"), Token::new(1, "he")],
            vec![MentionSpan::new(0, 1, Some(4)), MentionSpan { start: 1, end: 2, entity_id: Some(4), incorrect_reference: true }],
        );
        doc.tokens[1].trailing_space = false;
        let emitted = emit_conll(&doc);
        assert!(emitted.contains("(4!)"), "{emitted}");
        let back = parse_conll(&emitted).unwrap();
        assert!(back[0].mentions.iter().any(|m| m.incorrect_reference));
    }

    #[test]
    fn sentence_breaks_are_preserved() {
        let text = "#begin document (s); part 000\n\
                    s 000 0 One NN - - - - - * -\n\
                    \n\
                    s 000 0 Two NN - - - - - * -\n\
                    s 000 1 words NN - - - - - * -\n\
                    \n#end document\n";
        let doc = &parse_conll(text).unwrap()[0];
        assert_eq!(doc.metadata.get("sentence_token_counts").unwrap(), "1 2");
        let again = &parse_conll(&emit_conll(doc)).unwrap()[0];
        assert_eq!(again.metadata.get("sentence_token_counts").unwrap(), "1 2");
    }
}
