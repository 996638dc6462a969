//! Core data types for coreference documents and pronoun/candidate instances.

pub mod conll;
pub mod map;
pub mod stats;
pub mod tokenize;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single token. `index` always equals the token's position in its
/// containing sequence; helpers that edit token streams re-number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub pos_tag: Option<String>,
    pub trailing_space: bool,
}

impl Token {
    pub fn new(index: usize, surface: impl Into<String>) -> Self {
        Token { index, surface: surface.into(), pos_tag: None, trailing_space: true }
    }
}

/// Half-open token span `[start, end)`, optionally tied to a cluster.
///
/// `incorrect_reference` marks gold annotations of misgendering or
/// deadnaming; it is never set on system output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MentionSpan {
    pub start: usize,
    pub end: usize,
    pub entity_id: Option<u32>,
    pub incorrect_reference: bool,
}

impl MentionSpan {
    pub fn new(start: usize, end: usize, entity_id: Option<u32>) -> Self {
        MentionSpan { start, end, entity_id, incorrect_reference: false }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn overlaps(&self, other: &MentionSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Genre {
    Wikipedia,
    Periodical,
    Fanfiction,
    Other,
}

impl Genre {
    /// Best-effort genre from a document id such as
    /// "wikipedia/dana_zzyym" or "ao3/scar_tissue".
    pub fn from_doc_id(doc_id: &str) -> Genre {
        let lower = doc_id.to_lowercase();
        if lower.contains("wikipedia") || lower.contains("wiki") {
            Genre::Wikipedia
        } else if lower.contains("periodical") || lower.contains("magazine") {
            Genre::Periodical
        } else if lower.contains("fanfic") || lower.contains("ao3") || lower.contains("archiveofourown") {
            Genre::Fanfiction
        } else {
            Genre::Other
        }
    }
}

/// A tokenized document with coreference clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub genre: Genre,
    pub tokens: Vec<Token>,
    pub mentions: Vec<MentionSpan>,
    pub metadata: BTreeMap<String, String>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, tokens: Vec<Token>, mentions: Vec<MentionSpan>) -> Self {
        let doc_id = doc_id.into();
        Document {
            genre: Genre::from_doc_id(&doc_id),
            doc_id,
            tokens,
            mentions,
            metadata: BTreeMap::new(),
        }
    }

    /// Checks the structural invariants: non-empty surfaces, contiguous
    /// indices, and in-bounds spans. Nesting and partial overlap of spans
    /// are allowed; the file format permits them.
    pub fn validate(&self) -> Result<()> {
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.surface.is_empty() {
                return Err(Error::Invalid(format!("{}: empty token surface at {i}", self.doc_id)));
            }
            if tok.index != i {
                return Err(Error::Invalid(format!(
                    "{}: token index {} at position {i}",
                    self.doc_id, tok.index
                )));
            }
        }
        for m in &self.mentions {
            if m.start >= m.end || m.end > self.tokens.len() {
                return Err(Error::Invalid(format!(
                    "{}: mention span [{}, {}) out of bounds (doc has {} tokens)",
                    self.doc_id,
                    m.start,
                    m.end,
                    self.tokens.len()
                )));
            }
        }
        Ok(())
    }

    /// Clusters keyed by entity id, in ascending id order.
    pub fn clusters(&self) -> BTreeMap<u32, Vec<MentionSpan>> {
        let mut out: BTreeMap<u32, Vec<MentionSpan>> = BTreeMap::new();
        for m in &self.mentions {
            if let Some(id) = m.entity_id {
                out.entry(id).or_default().push(*m);
            }
        }
        out
    }

    pub fn text(&self) -> String {
        render_tokens(&self.tokens)
    }
}

/// One pronoun plus two candidate names, as a binary classification example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapInstance {
    pub instance_id: String,
    pub tokens: Vec<Token>,
    pub pronoun_span: MentionSpan,
    pub candidate_a_span: MentionSpan,
    pub candidate_b_span: MentionSpan,
    pub a_is_coref: bool,
    pub b_is_coref: bool,
    pub source_url: String,
}

/// Gold label of a binary instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Choice {
    A,
    B,
    Neither,
}

impl Choice {
    pub fn as_str(&self) -> &'static str {
        match self {
            Choice::A => "A",
            Choice::B => "B",
            Choice::Neither => "Neither",
        }
    }

    pub fn parse(s: &str) -> Result<Choice> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Choice::A),
            "b" => Ok(Choice::B),
            "neither" | "none" => Ok(Choice::Neither),
            other => Err(Error::Invalid(format!("unknown choice {other:?} (expected A, B, or Neither)"))),
        }
    }
}

impl std::fmt::Display for Choice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl MapInstance {
    /// Gold label. Instances where neither candidate corefers are legal and
    /// carry the `Neither` label; scoring decides whether to exclude them.
    pub fn gold_choice(&self) -> Choice {
        match (self.a_is_coref, self.b_is_coref) {
            (true, _) => Choice::A,
            (false, true) => Choice::B,
            (false, false) => Choice::Neither,
        }
    }

    pub fn is_neither(&self) -> bool {
        matches!(self.gold_choice(), Choice::Neither)
    }

    pub fn text(&self) -> String {
        render_tokens(&self.tokens)
    }

    pub fn span_text(&self, span: &MentionSpan) -> String {
        render_tokens(&self.tokens[span.start..span.end.min(self.tokens.len())])
            .trim_end()
            .to_string()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        for (name, span) in [
            ("pronoun", &self.pronoun_span),
            ("candidate A", &self.candidate_a_span),
            ("candidate B", &self.candidate_b_span),
        ] {
            if span.start >= span.end || span.end > n {
                return Err(Error::row(
                    &self.instance_id,
                    format!("{name} span [{}, {}) out of bounds", span.start, span.end),
                ));
            }
        }
        if self.pronoun_span.len() != 1 {
            return Err(Error::row(&self.instance_id, "pronoun span must cover exactly one token"));
        }
        if self.candidate_a_span.overlaps(&self.candidate_b_span)
            || self.candidate_a_span.overlaps(&self.pronoun_span)
            || self.candidate_b_span.overlaps(&self.pronoun_span)
        {
            return Err(Error::row(&self.instance_id, "pronoun/candidate spans overlap"));
        }
        if self.a_is_coref && self.b_is_coref {
            return Err(Error::row(&self.instance_id, "both candidates marked coreferent"));
        }
        Ok(())
    }
}

/// Renders a token slice back to text using the recorded spacing.
pub fn render_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        out.push_str(&tok.surface);
        if tok.trailing_space && i + 1 < tokens.len() {
            out.push(' ');
        }
    }
    out
}

/// Re-numbers token indices after an edit.
pub fn reindex(tokens: &mut [Token]) {
    for (i, tok) in tokens.iter_mut().enumerate() {
        tok.index = i;
    }
}
