//! Machine-readable inventory of linguistic-gender cue classes: pronoun
//! paradigms, gendered nouns, terms of address, and the replacement name
//! pool used for name ablation.
//!
//! The lexicon is immutable after load and safe to share across threads.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Token;
use crate::error::{Error, Result};

pub const DEFAULT_PARADIGMS_TSV: &str = include_str!("../data/lexicon/paradigms.tsv");
pub const DEFAULT_NOUNS_TSV: &str = include_str!("../data/lexicon/nouns.tsv");
pub const DEFAULT_ADDRESS_TSV: &str = include_str!("../data/lexicon/address.tsv");
pub const DEFAULT_NAMES_TSV: &str = include_str!("../data/lexicon/names.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PronounCategory {
    Binary,
    SingularThey,
    Neopronoun,
}

impl PronounCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            PronounCategory::Binary => "binary",
            PronounCategory::SingularThey => "singular-they",
            PronounCategory::Neopronoun => "neopronoun",
        }
    }
}

impl fmt::Display for PronounCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PronounCase {
    Nominative,
    Accusative,
    PossessiveDeterminer,
    PossessiveIndependent,
    Reflexive,
}

pub const ALL_CASES: [PronounCase; 5] = [
    PronounCase::Nominative,
    PronounCase::Accusative,
    PronounCase::PossessiveDeterminer,
    PronounCase::PossessiveIndependent,
    PronounCase::Reflexive,
];

impl PronounCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            PronounCase::Nominative => "nominative",
            PronounCase::Accusative => "accusative",
            PronounCase::PossessiveDeterminer => "possessive-determiner",
            PronounCase::PossessiveIndependent => "possessive-independent",
            PronounCase::Reflexive => "reflexive",
        }
    }
}

impl fmt::Display for PronounCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A pronoun paradigm: one surface form per case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounParadigm {
    pub paradigm_id: String,
    pub category: PronounCategory,
    forms: [String; 5],
}

impl PronounParadigm {
    pub fn form(&self, case: PronounCase) -> &str {
        &self.forms[case_index(case)]
    }
}

fn case_index(case: PronounCase) -> usize {
    ALL_CASES.iter().position(|c| *c == case).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexicalGender {
    Fem,
    Masc,
}

/// A semantically gendered noun with its gender-indefinite replacement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderedNounEntry {
    pub gendered_form: String,
    pub plural_form: Option<String>,
    pub neutral_form: String,
    pub neutral_plural: Option<String>,
    pub lexical_gender: LexicalGender,
}

/// A gendered term of address; the only supported action is deletion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressTerm {
    pub surface_variants: Vec<String>,
}

/// A replacement name rendered as two tokens: "M." "Booth".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameEntry {
    pub initial: String,
    pub last_name: String,
}

impl NameEntry {
    pub fn render(&self) -> String {
        format!("{} {}", self.initial, self.last_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamePool {
    pub entries: Vec<NameEntry>,
}

/// Where a pronoun-token lookup landed.
#[derive(Debug, Clone, PartialEq)]
pub enum CueClass<'a> {
    Pronoun { paradigm: &'a PronounParadigm, case: PronounCase },
    GenderedNoun { entry: &'a GenderedNounEntry, plural: bool },
    AddressTerm,
    Name,
    Other,
}

#[derive(Debug)]
pub struct Lexicon {
    pub paradigms: Vec<PronounParadigm>,
    pub nouns: Vec<GenderedNounEntry>,
    pub address_terms: Vec<AddressTerm>,
    pub name_pool: NamePool,
    // lowercased lookup tables
    pronoun_forms: HashMap<String, Vec<(usize, PronounCase)>>,
    noun_forms: HashMap<String, (usize, bool)>,
    address_forms: HashMap<String, usize>,
}

impl Lexicon {
    /// The lexicon shipped with the crate.
    pub fn shipped() -> Lexicon {
        Lexicon::from_tsv(
            DEFAULT_PARADIGMS_TSV,
            DEFAULT_NOUNS_TSV,
            DEFAULT_ADDRESS_TSV,
            DEFAULT_NAMES_TSV,
        )
        .expect("shipped lexicon is valid")
    }

    /// Loads `paradigms.tsv`, `nouns.tsv`, `address.tsv`, and `names.tsv`
    /// from a directory.
    pub fn load(dir: &Path) -> Result<Lexicon> {
        let read = |name: &str| -> Result<String> {
            std::fs::read_to_string(dir.join(name))
                .map_err(|e| Error::Lexicon(format!("{}: {e}", dir.join(name).display())))
        };
        Lexicon::from_tsv(
            &read("paradigms.tsv")?,
            &read("nouns.tsv")?,
            &read("address.tsv")?,
            &read("names.tsv")?,
        )
    }

    pub fn from_tsv(paradigms: &str, nouns: &str, address: &str, names: &str) -> Result<Lexicon> {
        let paradigms = parse_paradigms(paradigms)?;
        let nouns = parse_nouns(nouns)?;
        let address_terms = parse_address(address)?;
        let name_pool = parse_names(names)?;
        Lexicon::assemble(paradigms, nouns, address_terms, name_pool)
    }

    fn assemble(
        paradigms: Vec<PronounParadigm>,
        nouns: Vec<GenderedNounEntry>,
        address_terms: Vec<AddressTerm>,
        name_pool: NamePool,
    ) -> Result<Lexicon> {
        let mut pronoun_forms: HashMap<String, Vec<(usize, PronounCase)>> = HashMap::new();
        for (i, p) in paradigms.iter().enumerate() {
            for case in ALL_CASES {
                pronoun_forms
                    .entry(p.form(case).to_lowercase())
                    .or_default()
                    .push((i, case));
            }
        }

        let mut noun_forms: HashMap<String, (usize, bool)> = HashMap::new();
        for (i, n) in nouns.iter().enumerate() {
            let key = n.gendered_form.to_lowercase();
            if noun_forms.insert(key.clone(), (i, false)).is_some() {
                return Err(Error::Lexicon(format!("duplicate gendered form {key:?}")));
            }
            if let Some(pl) = &n.plural_form {
                let key = pl.to_lowercase();
                if noun_forms.insert(key.clone(), (i, true)).is_some() {
                    return Err(Error::Lexicon(format!("duplicate gendered form {key:?}")));
                }
            }
        }

        // Address terms match case-sensitively: honorifics are capitalized,
        // and a lowercase collision ("miss" the verb) must not be deleted.
        let mut address_forms: HashMap<String, usize> = HashMap::new();
        for (i, term) in address_terms.iter().enumerate() {
            for v in &term.surface_variants {
                if address_forms.insert(v.clone(), i).is_some() {
                    return Err(Error::Lexicon(format!("duplicate address-term variant {v:?}")));
                }
            }
        }

        // Cue classes must partition the vocabulary.
        let address_lower: Vec<String> = address_forms.keys().map(|k| k.to_lowercase()).collect();
        for key in pronoun_forms.keys() {
            if noun_forms.contains_key(key) || address_lower.contains(key) {
                return Err(Error::Lexicon(format!("{key:?} appears in more than one cue class")));
            }
        }
        for key in noun_forms.keys() {
            if address_lower.contains(key) {
                return Err(Error::Lexicon(format!("{key:?} appears in more than one cue class")));
            }
        }
        // Replacing a gendered noun must not introduce another gendered noun,
        // and replacement names must not introduce cue tokens.
        for n in &nouns {
            for neutral in [Some(&n.neutral_form), n.neutral_plural.as_ref()].into_iter().flatten() {
                for word in neutral.split_whitespace() {
                    if noun_forms.contains_key(&word.to_lowercase()) {
                        return Err(Error::Lexicon(format!(
                            "neutral form {neutral:?} contains gendered form {word:?}"
                        )));
                    }
                }
            }
        }
        for entry in &name_pool.entries {
            let key = entry.last_name.to_lowercase();
            if pronoun_forms.contains_key(&key)
                || noun_forms.contains_key(&key)
                || address_forms.contains_key(&key)
            {
                return Err(Error::Lexicon(format!(
                    "pool name {:?} collides with a cue class",
                    entry.last_name
                )));
            }
        }

        Ok(Lexicon { paradigms, nouns, address_terms, name_pool, pronoun_forms, noun_forms, address_forms })
    }

    pub fn paradigm(&self, id: &str) -> Option<&PronounParadigm> {
        self.paradigms.iter().find(|p| p.paradigm_id == id)
    }

    pub fn is_pronoun_form(&self, surface: &str) -> bool {
        self.pronoun_forms.contains_key(&surface.to_lowercase())
    }

    pub fn pronoun_candidates(&self, surface: &str) -> &[(usize, PronounCase)] {
        self.pronoun_forms
            .get(&surface.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn noun_entry(&self, surface: &str) -> Option<(&GenderedNounEntry, bool)> {
        self.noun_forms
            .get(&surface.to_lowercase())
            .map(|(i, plural)| (&self.nouns[*i], *plural))
    }

    pub fn is_address_term(&self, surface: &str) -> bool {
        self.address_forms.contains_key(surface)
    }

    /// Resolves a pronoun surface form to `(paradigm, case)`.
    ///
    /// Forms that are ambiguous within a paradigm ("her", "his", "zir") are
    /// resolved from a part-of-speech tag when one is present, otherwise by
    /// the following token: a possessive determiner must be followed by
    /// something that can start a nominal, so punctuation, conjunctions,
    /// verb forms, and determiners force the non-determiner reading.
    pub fn pronoun_case(&self, tokens: &[Token], index: usize) -> Result<(&PronounParadigm, PronounCase)> {
        let tok = &tokens[index];
        let candidates = self.pronoun_candidates(&tok.surface);
        match candidates.len() {
            0 => Err(Error::Invalid(format!("unknown pronoun form {:?}", tok.surface))),
            1 => {
                let (pi, case) = candidates[0];
                Ok((&self.paradigms[pi], case))
            }
            _ => {
                // A form shared across paradigms (a custom lexicon could give
                // two neopronoun paradigms the same accusative) resolves to
                // the first paradigm that lists it.
                let pi = candidates[0].0;
                let cases: Vec<PronounCase> =
                    candidates.iter().filter(|(p, _)| *p == pi).map(|(_, c)| *c).collect();
                let determiner_reading = cases
                    .iter()
                    .copied()
                    .find(|c| *c == PronounCase::PossessiveDeterminer);
                let other_reading = cases
                    .iter()
                    .copied()
                    .find(|c| *c != PronounCase::PossessiveDeterminer)
                    .unwrap_or(PronounCase::Accusative);
                let case = match determiner_reading {
                    Some(det) => {
                        if self.reads_as_determiner(tokens, index) {
                            det
                        } else {
                            other_reading
                        }
                    }
                    None => other_reading,
                };
                Ok((&self.paradigms[pi], case))
            }
        }
    }

    fn reads_as_determiner(&self, tokens: &[Token], index: usize) -> bool {
        if let Some(tag) = tokens[index].pos_tag.as_deref() {
            if tag.eq_ignore_ascii_case("PRP$") {
                return true;
            }
            if tag.eq_ignore_ascii_case("PRP") {
                return false;
            }
        }
        let next = match tokens.get(index + 1) {
            Some(t) => t,
            None => return false,
        };
        let surface = next.surface.as_str();
        if surface.chars().all(|c| !c.is_alphanumeric()) {
            return false; // punctuation
        }
        let lower = surface.to_lowercase();
        if CONJUNCTIONS.contains(&lower.as_str()) || DETERMINERS.contains(&lower.as_str()) {
            return false;
        }
        if let Some(tag) = next.pos_tag.as_deref() {
            return !tag.starts_with('V') && !tag.starts_with("MD");
        }
        !is_verb_like(&lower)
    }

    /// Surface form for `(paradigm, case)` with optional capitalization.
    pub fn render_pronoun(&self, paradigm: &PronounParadigm, case: PronounCase, capitalize: bool) -> String {
        let form = paradigm.form(case);
        if capitalize {
            capitalize_first(form)
        } else {
            form.to_string()
        }
    }

    /// Classifies a token in context into exactly one cue class.
    pub fn classify_token<'a>(&'a self, tokens: &[Token], index: usize) -> CueClass<'a> {
        let tok = &tokens[index];
        if self.is_pronoun_form(&tok.surface) {
            let (paradigm, case) = self
                .pronoun_case(tokens, index)
                .expect("form already verified as a pronoun");
            return CueClass::Pronoun { paradigm, case };
        }
        if self.is_address_term(&tok.surface) {
            return CueClass::AddressTerm;
        }
        if let Some((entry, plural)) = self.noun_entry(&tok.surface) {
            return CueClass::GenderedNoun { entry, plural };
        }
        if looks_like_name(tokens, index) {
            return CueClass::Name;
        }
        CueClass::Other
    }
}

const CONJUNCTIONS: &[&str] = &["and", "or", "but", "nor", "so", "yet"];

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "some", "any", "no", "every", "each",
];

const AUXILIARIES: &[&str] = &[
    "is", "was", "are", "were", "am", "be", "been", "being", "has", "have", "had", "does", "do",
    "did", "will", "would", "shall", "should", "can", "could", "may", "might", "must",
];

/// Common verbs for the disambiguation heuristic and agreement fixing;
/// closed list, extended as mistakes surface in tagged samples.
pub(crate) const VERB_BASES: &[&str] = &[
    "go", "say", "work", "live", "like", "love", "want", "need", "make", "take", "see", "know",
    "think", "get", "give", "find", "tell", "call", "try", "ask", "feel", "seem", "leave", "run",
    "walk", "write", "read", "play", "move", "look", "turn", "start", "stop", "help", "talk",
    "speak", "enter", "study", "teach", "hold", "keep", "stay", "win", "lose", "eat", "drink",
    "open", "close", "visit", "watch", "catch", "wish", "miss", "pass", "push", "reach", "carry",
    "marry", "worry", "hurry", "come", "meet", "sit", "stand", "wait", "smile", "laugh", "cry",
];

fn is_verb_like(lower: &str) -> bool {
    if AUXILIARIES.contains(&lower) || VERB_BASES.contains(&lower) {
        return true;
    }
    third_person_base(lower).is_some()
}

/// If `lower` is a third-person-singular present form of a known base verb,
/// returns the base.
pub(crate) fn third_person_base(lower: &str) -> Option<&'static str> {
    let find = |stem: &str| VERB_BASES.iter().copied().find(|b| *b == stem);
    if let Some(stem) = lower.strip_suffix("ies") {
        let candidate = format!("{stem}y");
        if let Some(base) = find(&candidate) {
            return Some(base);
        }
    }
    if let Some(stem) = lower.strip_suffix('s') {
        if let Some(base) = find(stem) {
            return Some(base);
        }
    }
    if let Some(stem) = lower.strip_suffix("es") {
        if let Some(base) = find(stem) {
            return Some(base);
        }
    }
    None
}

fn looks_like_name(tokens: &[Token], index: usize) -> bool {
    let tok = &tokens[index];
    let mut chars = tok.surface.chars();
    let first_upper = chars.next().is_some_and(|c| c.is_uppercase());
    if !first_upper {
        return false;
    }
    if let Some(tag) = tok.pos_tag.as_deref() {
        return tag.starts_with("NNP");
    }
    let sentence_initial = index == 0
        || tokens
            .get(index - 1)
            .is_some_and(|t| matches!(t.surface.as_str(), "." | "!" | "?"));
    if !sentence_initial {
        return true;
    }
    // Sentence-initial capitalization is uninformative; require a capitalized
    // neighbor before reading the token as a name.
    tokens
        .get(index + 1)
        .is_some_and(|t| t.surface.chars().next().is_some_and(|c| c.is_uppercase()))
}

pub(crate) fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Re-applies the capitalization shape of `original` to `replacement`.
pub(crate) fn match_capitalization(original: &str, replacement: &str) -> String {
    let chars: Vec<char> = original.chars().collect();
    let all_upper = chars.len() > 1 && chars.iter().all(|c| !c.is_alphabetic() || c.is_uppercase());
    if all_upper {
        return replacement.to_uppercase();
    }
    if chars.first().is_some_and(|c| c.is_uppercase()) {
        return capitalize_first(replacement);
    }
    replacement.to_string()
}

// ---------------------------------------------------------------------------
// TSV parsing

fn data_rows(tsv: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    tsv.lines().enumerate().skip(1).filter_map(|(i, line)| {
        if line.trim().is_empty() {
            None
        } else {
            Some((i + 1, line.split('\t').map(str::trim).collect()))
        }
    })
}

fn parse_paradigms(tsv: &str) -> Result<Vec<PronounParadigm>> {
    let mut out: Vec<PronounParadigm> = Vec::new();
    for (line, cols) in data_rows(tsv) {
        if cols.len() != 7 {
            return Err(Error::Lexicon(format!(
                "paradigms.tsv line {line}: expected 7 columns, found {}",
                cols.len()
            )));
        }
        let paradigm_id = cols[0].to_string();
        if out.iter().any(|p| p.paradigm_id == paradigm_id) {
            return Err(Error::Lexicon(format!("duplicate paradigm {paradigm_id:?}")));
        }
        let category = match cols[1] {
            "binary" => PronounCategory::Binary,
            "singular-they" => PronounCategory::SingularThey,
            "neopronoun" => PronounCategory::Neopronoun,
            other => {
                return Err(Error::Lexicon(format!(
                    "paradigm {paradigm_id:?}: unknown category {other:?}"
                )))
            }
        };
        let expected = match paradigm_id.as_str() {
            "she" | "he" => PronounCategory::Binary,
            "they" => PronounCategory::SingularThey,
            _ => PronounCategory::Neopronoun,
        };
        if category != expected {
            return Err(Error::Lexicon(format!(
                "paradigm {paradigm_id:?}: category must be {expected}"
            )));
        }
        let mut forms: [String; 5] = Default::default();
        for (k, case) in ALL_CASES.iter().enumerate() {
            let form = cols[2 + k];
            if form.is_empty() || form == "_" {
                return Err(Error::Lexicon(format!(
                    "paradigm {paradigm_id:?}: missing {case} form"
                )));
            }
            forms[k] = form.to_string();
        }
        out.push(PronounParadigm { paradigm_id, category, forms });
    }
    if out.is_empty() {
        return Err(Error::Lexicon("paradigms.tsv has no rows".into()));
    }
    Ok(out)
}

fn parse_nouns(tsv: &str) -> Result<Vec<GenderedNounEntry>> {
    let mut out = Vec::new();
    for (line, cols) in data_rows(tsv) {
        if cols.len() != 5 {
            return Err(Error::Lexicon(format!(
                "nouns.tsv line {line}: expected 5 columns, found {}",
                cols.len()
            )));
        }
        let opt = |s: &str| {
            if s.is_empty() || s == "_" {
                None
            } else {
                Some(s.to_string())
            }
        };
        let entry = GenderedNounEntry {
            gendered_form: cols[0].to_string(),
            plural_form: opt(cols[1]),
            neutral_form: cols[2].to_string(),
            neutral_plural: opt(cols[3]),
            lexical_gender: match cols[4] {
                "fem" => LexicalGender::Fem,
                "masc" => LexicalGender::Masc,
                other => {
                    return Err(Error::Lexicon(format!(
                        "nouns.tsv line {line}: unknown lexical gender {other:?}"
                    )))
                }
            },
        };
        if entry.gendered_form.is_empty() || entry.neutral_form.is_empty() {
            return Err(Error::Lexicon(format!("nouns.tsv line {line}: empty form")));
        }
        if entry.gendered_form.eq_ignore_ascii_case(&entry.neutral_form) {
            return Err(Error::Lexicon(format!(
                "nouns.tsv line {line}: gendered and neutral forms are identical"
            )));
        }
        if entry.plural_form.is_some() && entry.neutral_plural.is_none() {
            return Err(Error::Lexicon(format!(
                "nouns.tsv line {line}: plural form without a neutral plural"
            )));
        }
        out.push(entry);
    }
    Ok(out)
}

fn parse_address(tsv: &str) -> Result<Vec<AddressTerm>> {
    let mut out = Vec::new();
    for (line, cols) in data_rows(tsv) {
        let surface_variants: Vec<String> =
            cols.iter().filter(|s| !s.is_empty()).map(|s| s.to_string()).collect();
        if surface_variants.is_empty() {
            return Err(Error::Lexicon(format!("address.tsv line {line}: empty row")));
        }
        out.push(AddressTerm { surface_variants });
    }
    Ok(out)
}

fn parse_names(tsv: &str) -> Result<NamePool> {
    let mut entries = Vec::new();
    for (line, cols) in data_rows(tsv) {
        if cols.len() != 2 || cols[0].is_empty() || cols[1].is_empty() {
            return Err(Error::Lexicon(format!(
                "names.tsv line {line}: expected initial and last name"
            )));
        }
        let entry = NameEntry { initial: cols[0].to_string(), last_name: cols[1].to_string() };
        if !entry.initial.ends_with('.') || entry.initial.chars().count() != 2 {
            return Err(Error::Lexicon(format!(
                "names.tsv line {line}: initial must be a single letter plus '.'"
            )));
        }
        if entries.contains(&entry) {
            return Err(Error::Lexicon(format!("names.tsv line {line}: duplicate pool entry")));
        }
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(Error::Lexicon("names.tsv: empty name pool".into()));
    }
    Ok(NamePool { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize::tokenize;

    fn lex() -> Lexicon {
        Lexicon::shipped()
    }

    #[test]
    fn shipped_lexicon_has_the_expected_paradigms() {
        let lex = lex();
        let ids: Vec<&str> = lex.paradigms.iter().map(|p| p.paradigm_id.as_str()).collect();
        assert_eq!(ids, vec!["she", "he", "they", "ze", "xey"]);
        assert!(lex.nouns.len() >= 150, "{} noun pairs", lex.nouns.len());
        assert!(lex.address_terms.len() >= 12, "{} address terms", lex.address_terms.len());
    }

    #[test]
    fn duplicate_noun_is_rejected() {
        let nouns = "gendered\tplural\tneutral\tneutral_plural\tlexical_gender\n\
                     sister\tsisters\tsibling\tsiblings\tfem\n\
                     sister\tsisters\tsibling\tsiblings\tfem\n";
        let err = Lexicon::from_tsv(DEFAULT_PARADIGMS_TSV, nouns, DEFAULT_ADDRESS_TSV, DEFAULT_NAMES_TSV)
            .unwrap_err();
        assert!(err.to_string().contains("duplicate gendered form"), "{err}");
    }

    #[test]
    fn missing_case_names_paradigm_and_case() {
        let paradigms = "paradigm_id\tcategory\tnominative\taccusative\tpossessive_determiner\tpossessive_independent\treflexive\n\
                         ze\tneopronoun\tze\tzir\tzir\tzirs\t_\n";
        let err = Lexicon::from_tsv(paradigms, DEFAULT_NOUNS_TSV, DEFAULT_ADDRESS_TSV, DEFAULT_NAMES_TSV)
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("ze") && msg.contains("reflexive"), "{msg}");
    }

    #[test]
    fn cross_class_surface_is_rejected() {
        // "her" is a pronoun form; listing it as a gendered noun must fail.
        let nouns = "gendered\tplural\tneutral\tneutral_plural\tlexical_gender\n\
                     her\thers\tperson\tpeople\tfem\n";
        let err = Lexicon::from_tsv(DEFAULT_PARADIGMS_TSV, nouns, DEFAULT_ADDRESS_TSV, DEFAULT_NAMES_TSV)
            .unwrap_err();
        assert!(err.to_string().contains("more than one cue class"), "{err}");
    }

    #[test]
    fn empty_name_pool_is_rejected() {
        let err = Lexicon::from_tsv(
            DEFAULT_PARADIGMS_TSV,
            DEFAULT_NOUNS_TSV,
            DEFAULT_ADDRESS_TSV,
            "initial\tlast_name\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("empty name pool"), "{err}");
    }

    #[test]
    fn classify_examples() {
        let lex = lex();
        let (tokens, _) = tokenize("Mrs. Smith met her sister and ran.");
        assert!(matches!(lex.classify_token(&tokens, 0), CueClass::AddressTerm));
        assert!(matches!(lex.classify_token(&tokens, 4), CueClass::GenderedNoun { .. }));
        assert!(matches!(lex.classify_token(&tokens, 6), CueClass::Other));
        assert!(matches!(lex.classify_token(&tokens, 1), CueClass::Name));
    }

    #[test]
    fn pronoun_case_heuristic() {
        let lex = lex();
        let (tokens, _) = tokenize("himself");
        let (p, c) = lex.pronoun_case(&tokens, 0).unwrap();
        assert_eq!((p.paradigm_id.as_str(), c), ("he", PronounCase::Reflexive));

        let (tokens, _) = tokenize("visited her mother");
        let (p, c) = lex.pronoun_case(&tokens, 1).unwrap();
        assert_eq!((p.paradigm_id.as_str(), c), ("she", PronounCase::PossessiveDeterminer));

        let (tokens, _) = tokenize("visited her .");
        let (p, c) = lex.pronoun_case(&tokens, 1).unwrap();
        assert_eq!((p.paradigm_id.as_str(), c), ("she", PronounCase::Accusative));

        let (tokens, _) = tokenize("told her the story");
        let (_, c) = lex.pronoun_case(&tokens, 1).unwrap();
        assert_eq!(c, PronounCase::Accusative);
    }

    #[test]
    fn pos_tags_override_the_heuristic() {
        let lex = lex();
        let (mut tokens, _) = tokenize("her smile");
        tokens[0].pos_tag = Some("PRP$".into());
        let (_, c) = lex.pronoun_case(&tokens, 0).unwrap();
        assert_eq!(c, PronounCase::PossessiveDeterminer);
        tokens[0].pos_tag = Some("PRP".into());
        let (_, c) = lex.pronoun_case(&tokens, 0).unwrap();
        assert_eq!(c, PronounCase::Accusative);
    }

    #[test]
    fn render_examples() {
        let lex = lex();
        let they = lex.paradigm("they").unwrap();
        assert_eq!(lex.render_pronoun(they, PronounCase::PossessiveDeterminer, false), "their");
        assert_eq!(lex.render_pronoun(they, PronounCase::Nominative, true), "They");
        let ze = lex.paradigm("ze").unwrap();
        assert_eq!(lex.render_pronoun(ze, PronounCase::Reflexive, false), "zirself");
    }

    #[test]
    fn every_shipped_form_classifies_as_pronoun() {
        let lex = lex();
        for p in &lex.paradigms {
            for case in ALL_CASES {
                let (tokens, _) = tokenize(p.form(case));
                assert!(
                    matches!(lex.classify_token(&tokens, 0), CueClass::Pronoun { .. }),
                    "{} {case}",
                    p.form(case)
                );
            }
        }
    }

    #[test]
    fn unambiguous_forms_round_trip_through_pronoun_case() {
        let lex = lex();
        for p in &lex.paradigms {
            for case in ALL_CASES {
                let form = p.form(case);
                let unambiguous =
                    ALL_CASES.iter().filter(|c| p.form(**c) == form).count() == 1;
                if !unambiguous {
                    continue;
                }
                let (tokens, _) = tokenize(form);
                let (found, found_case) = lex.pronoun_case(&tokens, 0).unwrap();
                assert_eq!(found.paradigm_id, p.paradigm_id);
                assert_eq!(found_case, case, "form {form:?}");
            }
        }
    }
}
