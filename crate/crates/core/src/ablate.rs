//! Gender-cue ablation: the four substitutions and the ten named
//! experimental conditions they compose into.
//!
//! The substitutions operate on disjoint token classes (the lexicon loader
//! enforces this), so their application order cannot change the output;
//! [`apply_config`] still fixes a canonical order Addr -> Sem -> Name -> Pro
//! for reproducibility. Every edit is tracked in an [`OffsetMap`] so that
//! pronoun, candidate, and mention spans stay valid.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::map::strip_clitic;
use crate::corpus::{reindex, Document, MapInstance, MentionSpan, Token};
use crate::error::{Error, Result};
use crate::lexicon::{
    match_capitalization, third_person_base, CueClass, Lexicon, NameEntry, NamePool, PronounCase,
    PronounCategory,
};

/// Which of the four substitutions are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SubstitutionSet {
    pub pronouns: bool,
    pub names: bool,
    pub sem_nouns: bool,
    pub address: bool,
}

impl SubstitutionSet {
    pub fn all() -> SubstitutionSet {
        SubstitutionSet { pronouns: true, names: true, sem_nouns: true, address: true }
    }
}

/// The ten named experimental conditions: forward selection starts from
/// everything removed and adds one cue class back at a time; backward
/// selection removes one class from the original text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Preset {
    Zero,
    NotNameNotSemNotAddr,
    NotSemNotAddr,
    NotNameNotAddr,
    NotNameNotSem,
    Orig,
    NotPro,
    NotName,
    NotSem,
    NotAddr,
}

impl Preset {
    pub const ALL: [Preset; 10] = [
        Preset::Zero,
        Preset::NotNameNotSemNotAddr,
        Preset::NotSemNotAddr,
        Preset::NotNameNotAddr,
        Preset::NotNameNotSem,
        Preset::Orig,
        Preset::NotPro,
        Preset::NotName,
        Preset::NotSem,
        Preset::NotAddr,
    ];

    pub fn active(&self) -> SubstitutionSet {
        let on = |pronouns, names, sem_nouns, address| SubstitutionSet { pronouns, names, sem_nouns, address };
        match self {
            Preset::Zero => on(true, true, true, true),
            Preset::NotNameNotSemNotAddr => on(false, true, true, true),
            Preset::NotSemNotAddr => on(false, false, true, true),
            Preset::NotNameNotAddr => on(false, true, false, true),
            Preset::NotNameNotSem => on(false, true, true, false),
            Preset::Orig => on(false, false, false, false),
            Preset::NotPro => on(true, false, false, false),
            Preset::NotName => on(false, true, false, false),
            Preset::NotSem => on(false, false, true, false),
            Preset::NotAddr => on(false, false, false, true),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Zero => "Zero",
            Preset::NotNameNotSemNotAddr => "NotNameNotSemNotAddr",
            Preset::NotSemNotAddr => "NotSemNotAddr",
            Preset::NotNameNotAddr => "NotNameNotAddr",
            Preset::NotNameNotSem => "NotNameNotSem",
            Preset::Orig => "Orig",
            Preset::NotPro => "NotPro",
            Preset::NotName => "NotName",
            Preset::NotSem => "NotSem",
            Preset::NotAddr => "NotAddr",
        }
    }

    pub fn parse(s: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown preset {s:?}")))
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgreementMode {
    Off,
    Basic,
}

/// Full configuration for one ablation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationConfig {
    pub active: SubstitutionSet,
    pub preset: Option<Preset>,
    pub target_paradigm: String,
    pub agreement_mode: AgreementMode,
    pub seed: u64,
}

impl AblationConfig {
    /// A preset configuration with target "they". Verb agreement fixing
    /// defaults on for "they" and off for paradigms that take singular
    /// agreement (ze, xey).
    pub fn preset(preset: Preset, seed: u64) -> AblationConfig {
        AblationConfig::preset_with_target(preset, "they", seed)
    }

    pub fn preset_with_target(preset: Preset, target: &str, seed: u64) -> AblationConfig {
        AblationConfig {
            active: preset.active(),
            preset: Some(preset),
            target_paradigm: target.to_string(),
            agreement_mode: default_agreement(target),
            seed,
        }
    }
}

pub fn default_agreement(target_paradigm: &str) -> AgreementMode {
    if target_paradigm == "they" {
        AgreementMode::Basic
    } else {
        AgreementMode::Off
    }
}

/// Piecewise monotone map from original token indices to transformed
/// indices. Stored as the image of every token boundary, so a half-open
/// span maps by looking up both endpoints; deleted tokens map to the
/// position of the gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetMap {
    boundaries: Vec<usize>,
}

impl OffsetMap {
    pub fn identity(n_tokens: usize) -> OffsetMap {
        OffsetMap { boundaries: (0..=n_tokens).collect() }
    }

    pub fn source_len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn target_len(&self) -> usize {
        *self.boundaries.last().unwrap_or(&0)
    }

    pub fn map_index(&self, i: usize) -> usize {
        self.boundaries[i]
    }

    pub fn map_span(&self, start: usize, end: usize) -> (usize, usize) {
        (self.boundaries[start], self.boundaries[end])
    }

    pub fn map_mention(&self, m: &MentionSpan) -> MentionSpan {
        let (start, end) = self.map_span(m.start, m.end);
        MentionSpan { start, end, entity_id: m.entity_id, incorrect_reference: m.incorrect_reference }
    }

    /// `self` then `next`.
    pub fn compose(&self, next: &OffsetMap) -> OffsetMap {
        debug_assert_eq!(self.target_len(), next.source_len());
        OffsetMap { boundaries: self.boundaries.iter().map(|b| next.boundaries[*b]).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.boundaries.iter().enumerate().all(|(i, b)| i == *b)
    }
}

/// Accumulates token edits over one pass and produces the edited stream
/// plus its OffsetMap.
struct EditBuffer {
    out: Vec<Token>,
    boundaries: Vec<usize>,
}

impl EditBuffer {
    fn new() -> EditBuffer {
        EditBuffer { out: Vec::new(), boundaries: vec![0] }
    }

    fn keep(&mut self, token: &Token) {
        self.out.push(token.clone());
        self.boundaries.push(self.out.len());
    }

    /// Replaces `width` original tokens with `replacement`. The boundary
    /// after the replaced range maps to the end of the replacement;
    /// interior boundaries stay monotone in between.
    fn replace(&mut self, width: usize, replacement: Vec<Token>) {
        let start = self.out.len();
        let k = replacement.len();
        self.out.extend(replacement);
        for j in 1..width {
            self.boundaries.push(start + j.min(k));
        }
        self.boundaries.push(start + k);
    }

    fn finish(mut self) -> (Vec<Token>, OffsetMap) {
        if let Some(last) = self.out.last_mut() {
            last.trailing_space = false;
        }
        reindex(&mut self.out);
        (self.out, OffsetMap { boundaries: self.boundaries })
    }
}

fn new_token(surface: String, trailing_space: bool) -> Token {
    Token { index: 0, surface, pos_tag: None, trailing_space }
}

/// (a) Replace third-person gendered pronouns ("she"/"he" forms) by the
/// target paradigm's form of the same case, preserving capitalization.
/// With `AgreementMode::Basic` a finite verb directly after a replaced
/// nominative pronoun is mapped to its plural-agreement form.
pub fn ablate_pronouns(
    tokens: &[Token],
    lexicon: &Lexicon,
    target_paradigm: &str,
    agreement: AgreementMode,
) -> Result<(Vec<Token>, OffsetMap)> {
    let target = lexicon
        .paradigm(target_paradigm)
        .ok_or_else(|| Error::Invalid(format!("unknown target paradigm {target_paradigm:?}")))?;
    if target.category == PronounCategory::Binary {
        return Err(Error::Invalid(format!(
            "target paradigm {target_paradigm:?} is itself gendered"
        )));
    }

    let mut buf = EditBuffer::new();
    let mut fix_agreement_next = false;
    for (i, tok) in tokens.iter().enumerate() {
        if fix_agreement_next {
            fix_agreement_next = false;
            if let Some(fixed) = plural_agreement_form(&tok.surface) {
                let mut t = tok.clone();
                t.surface = fixed;
                buf.replace(1, vec![t]);
                continue;
            }
        }
        let replaced = match lexicon.classify_token(tokens, i) {
            CueClass::Pronoun { paradigm, case } if paradigm.category == PronounCategory::Binary => {
                let capitalized = tok.surface.chars().next().is_some_and(|c| c.is_uppercase());
                let mut t = tok.clone();
                t.surface = lexicon.render_pronoun(target, case, capitalized);
                buf.replace(1, vec![t]);
                if case == PronounCase::Nominative && agreement == AgreementMode::Basic {
                    fix_agreement_next = true;
                }
                true
            }
            _ => false,
        };
        if !replaced {
            buf.keep(tok);
        }
    }
    Ok(buf.finish())
}

/// Maps a third-person-singular verb to its plural-agreement form.
fn plural_agreement_form(surface: &str) -> Option<String> {
    let lower = surface.to_lowercase();
    let base = match lower.as_str() {
        "is" => Some("are"),
        "was" => Some("were"),
        "has" => Some("have"),
        "does" => Some("do"),
        _ => third_person_base(&lower),
    }?;
    Some(match_capitalization(surface, base))
}

/// (c) Replace semantically gendered nouns with their gender-indefinite
/// variants; multiword replacements are re-tokenized.
pub fn ablate_gendered_nouns(tokens: &[Token], lexicon: &Lexicon) -> (Vec<Token>, OffsetMap) {
    let mut buf = EditBuffer::new();
    for tok in tokens {
        match lexicon.noun_entry(&tok.surface) {
            Some((entry, plural)) => {
                let neutral = if plural {
                    entry
                        .neutral_plural
                        .clone()
                        .unwrap_or_else(|| format!("{}s", entry.neutral_form))
                } else {
                    entry.neutral_form.clone()
                };
                let surface = match_capitalization(&tok.surface, &neutral);
                let words: Vec<&str> = surface.split_whitespace().collect();
                let n = words.len();
                let replacement: Vec<Token> = words
                    .into_iter()
                    .enumerate()
                    .map(|(k, w)| {
                        new_token(w.to_string(), if k + 1 < n { true } else { tok.trailing_space })
                    })
                    .collect();
                buf.replace(1, replacement);
            }
            None => buf.keep(tok),
        }
    }
    buf.finish()
}

/// (d) Remove terms of address.
pub fn ablate_address_terms(tokens: &[Token], lexicon: &Lexicon) -> (Vec<Token>, OffsetMap) {
    let mut buf = EditBuffer::new();
    for tok in tokens {
        if lexicon.is_address_term(&tok.surface) {
            buf.replace(1, vec![]);
        } else {
            buf.keep(tok);
        }
    }
    buf.finish()
}

/// Deterministic mapping from each distinct name to its replacement.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameMapping {
    map: BTreeMap<String, NameEntry>,
}

impl NameMapping {
    pub fn get(&self, name_key: &str) -> Option<&NameEntry> {
        self.map.get(name_key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &NameEntry)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// A name occurrence: the span to replace plus the canonical key it is
/// grouped under. Keys are always computed on the original, un-ablated
/// token stream so that every condition of a suite shares one mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameSpan {
    pub start: usize,
    pub end: usize,
    pub key: String,
}

fn render_key(tokens: &[Token], start: usize, end: usize) -> String {
    tokens[start..end]
        .iter()
        .map(|t| strip_clitic(&t.surface).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Advances the span start past leading cue-class tokens ("Mrs. Davis",
/// "Queen Elizabeth"), so only the name proper is replaced; the leading
/// cue stays subject to its own substitution.
fn shrink_leading_cues(tokens: &[Token], start: usize, end: usize, lexicon: &Lexicon) -> (usize, usize) {
    let mut s = start;
    while s < end {
        let surface = &tokens[s].surface;
        if lexicon.is_address_term(surface)
            || lexicon.noun_entry(surface).is_some()
            || lexicon.is_pronoun_form(surface)
        {
            s += 1;
        } else {
            break;
        }
    }
    (s, end)
}

/// Collects name occurrences for the given seed spans on the original
/// token stream: the (shrunk) seeds themselves plus every other exact
/// occurrence of the same token sequence, all tagged with the seed's key.
pub fn find_name_spans(tokens: &[Token], seeds: &[(usize, usize)], lexicon: &Lexicon) -> Vec<NameSpan> {
    let mut keyed: Vec<(Vec<String>, String)> = Vec::new();
    let mut out: Vec<NameSpan> = Vec::new();
    for (start, end) in seeds {
        let (s, e) = shrink_leading_cues(tokens, *start, *end, lexicon);
        if s >= e {
            continue;
        }
        let key = render_key(tokens, s, e);
        out.push(NameSpan { start: s, end: e, key: key.clone() });
        let words: Vec<String> =
            tokens[s..e].iter().map(|t| strip_clitic(&t.surface).to_string()).collect();
        if !keyed.iter().any(|(w, _)| *w == words) {
            keyed.push((words, key));
        }
    }
    // Longer sequences first so "Lyndon B. Johnson" wins over a bare "Johnson".
    keyed.sort_by_key(|(w, _)| std::cmp::Reverse(w.len()));
    for (words, key) in keyed {
        let len = words.len();
        if len == 0 || len > tokens.len() {
            continue;
        }
        for start in 0..=(tokens.len() - len) {
            let matches =
                (0..len).all(|k| strip_clitic(&tokens[start + k].surface) == words[k]);
            if matches && !out.iter().any(|ns| ns.start == start && ns.end == start + len) {
                out.push(NameSpan { start, end: start + len, key: key.clone() });
            }
        }
    }
    out.sort_by_key(|ns| (ns.start, ns.end));
    // Drop spans that overlap an earlier (or longer) one.
    let mut chosen: Vec<NameSpan> = Vec::new();
    for ns in out {
        if chosen.last().is_none_or(|prev| prev.end <= ns.start) {
            chosen.push(ns);
        }
    }
    chosen
}

/// True when a name already has pool form ("M. Booth"), in which case it
/// maps to itself; this makes name ablation idempotent.
fn is_pool_form(key: &str) -> bool {
    let mut words = key.split(' ');
    let (initial, last) = match (words.next(), words.next(), words.next()) {
        (Some(i), Some(l), None) => (i, l),
        _ => return false,
    };
    let mut chars = initial.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() && c.is_uppercase())
        && chars.as_str() == "."
        && last.chars().next().is_some_and(|c| c.is_uppercase())
}

/// Builds the replacement mapping for the distinct keys of `spans`, in
/// first-occurrence order, sampling pool entries without replacement from
/// a ChaCha stream seeded with `seed`. Names already in pool form map to
/// themselves.
pub fn build_name_mapping(spans: &[NameSpan], pool: &NamePool, seed: u64) -> Result<NameMapping> {
    let mut ordered: Vec<&str> = Vec::new();
    for ns in spans {
        if !ordered.contains(&ns.key.as_str()) {
            ordered.push(&ns.key);
        }
    }

    let mut map = BTreeMap::new();
    for key in ordered.iter().filter(|k| is_pool_form(k)) {
        let (initial, last) = key.split_once(' ').expect("pool form has two words");
        map.insert(
            key.to_string(),
            NameEntry { initial: initial.to_string(), last_name: last.to_string() },
        );
    }

    let mut available: Vec<&NameEntry> = pool
        .entries
        .iter()
        .filter(|e| !map.contains_key(&e.render()))
        .collect();
    let needed = ordered.len() - map.len();
    if needed > available.len() {
        return Err(Error::PoolExhausted { needed, available: available.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    available.shuffle(&mut rng);

    let mut next = available.into_iter();
    for key in ordered {
        if map.contains_key(key) {
            continue;
        }
        map.insert(key.to_string(), next.next().expect("pool size checked above").clone());
    }
    Ok(NameMapping { map })
}

/// (b) Replace names by pool names ("first initial plus last name"),
/// consistently for every occurrence of the same name. A possessive clitic
/// on the final token is preserved.
pub fn ablate_names_with_mapping(
    tokens: &[Token],
    spans: &[NameSpan],
    mapping: &NameMapping,
) -> Result<(Vec<Token>, OffsetMap)> {
    let mut spans: Vec<&NameSpan> = spans.iter().collect();
    spans.sort_by_key(|ns| (ns.start, ns.end));

    let mut buf = EditBuffer::new();
    let mut i = 0;
    let mut span_iter = spans.into_iter().peekable();
    while i < tokens.len() {
        match span_iter.peek() {
            Some(ns) if ns.start == i => {
                let entry = mapping.get(&ns.key).ok_or_else(|| {
                    Error::Invalid(format!("name {:?} missing from the shared name mapping", ns.key))
                })?;
                let last_tok = &tokens[ns.end - 1];
                let stripped = strip_clitic(&last_tok.surface);
                let clitic_tail = &last_tok.surface[stripped.len()..];
                let replacement = vec![
                    new_token(entry.initial.clone(), true),
                    new_token(format!("{}{}", entry.last_name, clitic_tail), last_tok.trailing_space),
                ];
                buf.replace(ns.end - ns.start, replacement);
                i = ns.end;
                span_iter.next();
            }
            _ => {
                buf.keep(&tokens[i]);
                i += 1;
            }
        }
    }
    Ok(buf.finish())
}

/// Builds the mapping for the names under `seed_spans` and applies it in
/// one step.
pub fn ablate_names(
    tokens: &[Token],
    seed_spans: &[(usize, usize)],
    lexicon: &Lexicon,
    pool: &NamePool,
    seed: u64,
) -> Result<(Vec<Token>, OffsetMap, NameMapping)> {
    let spans = find_name_spans(tokens, seed_spans, lexicon);
    let mapping = build_name_mapping(&spans, pool, seed)?;
    let (out, offsets) = ablate_names_with_mapping(tokens, &spans, &mapping)?;
    Ok((out, offsets, mapping))
}

/// Output of [`apply_config`] on a binary instance.
#[derive(Debug, Clone)]
pub struct AblatedInstance {
    pub instance: MapInstance,
    pub offsets: OffsetMap,
    pub name_mapping: Option<NameMapping>,
}

/// Name occurrences for an instance, computed on its original tokens.
pub fn name_spans_for_instance(instance: &MapInstance, lexicon: &Lexicon) -> Vec<NameSpan> {
    find_name_spans(
        &instance.tokens,
        &[
            (instance.candidate_a_span.start, instance.candidate_a_span.end),
            (instance.candidate_b_span.start, instance.candidate_b_span.end),
        ],
        lexicon,
    )
}

/// Name occurrences for a document: gold mentions whose tokens are all
/// capitalized (GICoref marks person mentions; the heuristic covers files
/// without an explicit flag), plus repeats of those surfaces.
pub fn name_spans_for_document(doc: &Document, lexicon: &Lexicon) -> Vec<NameSpan> {
    let seeds: Vec<(usize, usize)> = doc
        .mentions
        .iter()
        .filter(|m| !m.is_empty() && m.end <= doc.tokens.len() && is_name_span(&doc.tokens, m))
        .map(|m| (m.start, m.end))
        .collect();
    find_name_spans(&doc.tokens, &seeds, lexicon)
}

/// A span is treated as a name when every token starts uppercase and none
/// is a pronoun form.
pub fn is_name_span(tokens: &[Token], m: &MentionSpan) -> bool {
    tokens[m.start..m.end.min(tokens.len())].iter().all(|t| {
        t.surface.chars().next().is_some_and(|c| c.is_uppercase())
            && t.surface.chars().any(|c| c.is_alphabetic())
    })
}

/// Applies the configured substitutions to one instance in the canonical
/// order Addr -> Sem -> Name -> Pro, remapping the pronoun and candidate
/// spans. Gold labels are never touched.
pub fn apply_config(
    instance: &MapInstance,
    lexicon: &Lexicon,
    config: &AblationConfig,
    shared_mapping: Option<&NameMapping>,
) -> Result<AblatedInstance> {
    apply_config_ordered(instance, lexicon, config, shared_mapping, &canonical_order(&config.active))
}

/// [`apply_config`] with an explicit pass order. The substitutions operate
/// on disjoint token classes, so every order yields the same output; the
/// property suite asserts this over all permutations.
pub fn apply_config_ordered(
    instance: &MapInstance,
    lexicon: &Lexicon,
    config: &AblationConfig,
    shared_mapping: Option<&NameMapping>,
    order: &[Substitution],
) -> Result<AblatedInstance> {
    let name_spans = if config.active.names {
        name_spans_for_instance(instance, lexicon)
    } else {
        Vec::new()
    };

    let mut tokens = instance.tokens.clone();
    let mut spans = [instance.pronoun_span, instance.candidate_a_span, instance.candidate_b_span];
    let mut total = OffsetMap::identity(tokens.len());
    let mut name_mapping = None;

    for pass in order {
        let (out, offsets) = match pass {
            Substitution::Address => ablate_address_terms(&tokens, lexicon),
            Substitution::SemNouns => ablate_gendered_nouns(&tokens, lexicon),
            Substitution::Names => {
                let mapping = match shared_mapping {
                    Some(m) => m.clone(),
                    None => build_name_mapping(
                        &name_spans,
                        &lexicon.name_pool,
                        instance_seed(config.seed, &instance.instance_id),
                    )?,
                };
                let current: Vec<NameSpan> = name_spans
                    .iter()
                    .map(|ns| {
                        let (s, e) = total.map_span(ns.start, ns.end);
                        NameSpan { start: s, end: e, key: ns.key.clone() }
                    })
                    .collect();
                let result = ablate_names_with_mapping(&tokens, &current, &mapping)?;
                name_mapping = Some(mapping);
                result
            }
            Substitution::Pronouns => {
                ablate_pronouns(&tokens, lexicon, &config.target_paradigm, config.agreement_mode)?
            }
        };
        for span in spans.iter_mut() {
            *span = offsets.map_mention(span);
        }
        total = total.compose(&offsets);
        tokens = out;
    }

    let mut out = instance.clone();
    out.tokens = tokens;
    out.pronoun_span = spans[0];
    out.candidate_a_span = spans[1];
    out.candidate_b_span = spans[2];
    Ok(AblatedInstance { instance: out, offsets: total, name_mapping })
}

/// Applies the configured substitutions to a document, remapping all
/// mention spans.
pub fn apply_config_document(
    doc: &Document,
    lexicon: &Lexicon,
    config: &AblationConfig,
    shared_mapping: Option<&NameMapping>,
) -> Result<(Document, OffsetMap, Option<NameMapping>)> {
    let name_spans = if config.active.names {
        name_spans_for_document(doc, lexicon)
    } else {
        Vec::new()
    };

    let mut tokens = doc.tokens.clone();
    let mut mentions = doc.mentions.clone();
    let mut total = OffsetMap::identity(tokens.len());
    let mut name_mapping = None;

    for pass in canonical_order(&config.active) {
        let (out, offsets) = match pass {
            Substitution::Address => ablate_address_terms(&tokens, lexicon),
            Substitution::SemNouns => ablate_gendered_nouns(&tokens, lexicon),
            Substitution::Names => {
                let mapping = match shared_mapping {
                    Some(m) => m.clone(),
                    None => build_name_mapping(
                        &name_spans,
                        &lexicon.name_pool,
                        instance_seed(config.seed, &doc.doc_id),
                    )?,
                };
                let current: Vec<NameSpan> = name_spans
                    .iter()
                    .map(|ns| {
                        let (s, e) = total.map_span(ns.start, ns.end);
                        NameSpan { start: s, end: e, key: ns.key.clone() }
                    })
                    .collect();
                let result = ablate_names_with_mapping(&tokens, &current, &mapping)?;
                name_mapping = Some(mapping);
                result
            }
            Substitution::Pronouns => {
                ablate_pronouns(&tokens, lexicon, &config.target_paradigm, config.agreement_mode)?
            }
        };
        for m in mentions.iter_mut() {
            *m = offsets.map_mention(m);
        }
        total = total.compose(&offsets);
        tokens = out;
    }

    // A mention whose every token was deleted has no transformed
    // counterpart; it drops out of the document.
    mentions.retain(|m| !m.is_empty());

    let mut out = doc.clone();
    out.metadata.remove(crate::corpus::conll::SENTENCE_LENGTHS_METADATA_KEY);
    out.tokens = tokens;
    out.mentions = mentions;
    Ok((out, total, name_mapping))
}

/// One of the four substitution passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substitution {
    Address,
    SemNouns,
    Names,
    Pronouns,
}

/// The canonical pass order Addr -> Sem -> Name -> Pro, restricted to the
/// active set.
pub fn canonical_order(active: &SubstitutionSet) -> Vec<Substitution> {
    let mut out = Vec::new();
    if active.address {
        out.push(Substitution::Address);
    }
    if active.sem_nouns {
        out.push(Substitution::SemNouns);
    }
    if active.names {
        out.push(Substitution::Names);
    }
    if active.pronouns {
        out.push(Substitution::Pronouns);
    }
    out
}

/// Stable per-instance seed: FNV-1a over the instance id, mixed with the
/// global seed, so corpus-parallel runs are order-independent.
pub fn instance_seed(global_seed: u64, instance_id: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET ^ global_seed;
    for b in instance_id.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// One entry of the ten-condition suite.
#[derive(Debug, Clone)]
pub struct ConditionVariant {
    pub preset: Preset,
    pub instance: MapInstance,
    pub offsets: OffsetMap,
}

/// Generates all ten named conditions for one instance. A single name
/// mapping is built up front and shared across conditions, so any two
/// conditions differ only in the cue classes that distinguish them.
pub fn condition_suite(
    instance: &MapInstance,
    lexicon: &Lexicon,
    seed: u64,
    target_paradigm: &str,
) -> Result<(Vec<ConditionVariant>, NameMapping)> {
    let spans = name_spans_for_instance(instance, lexicon);
    let mapping =
        build_name_mapping(&spans, &lexicon.name_pool, instance_seed(seed, &instance.instance_id))?;

    let mut out = Vec::with_capacity(Preset::ALL.len());
    for preset in Preset::ALL {
        let config = AblationConfig::preset_with_target(preset, target_paradigm, seed);
        let ablated = apply_config(instance, lexicon, &config, Some(&mapping))?;
        out.push(ConditionVariant { preset, instance: ablated.instance, offsets: ablated.offsets });
    }
    Ok((out, mapping))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::render_tokens;
    use crate::corpus::tokenize::tokenize;

    fn lex() -> Lexicon {
        Lexicon::shipped()
    }

    fn toks(text: &str) -> Vec<Token> {
        tokenize(text).0
    }

    #[test]
    fn pronoun_substitution_matches_case() {
        let tokens = toks("she worked before her brother arrived");
        let (out, offsets) = ablate_pronouns(&tokens, &lex(), "they", AgreementMode::Basic).unwrap();
        assert_eq!(render_tokens(&out), "they worked before their brother arrived");
        assert!(offsets.is_identity());
    }

    #[test]
    fn no_pronouns_means_identity() {
        let tokens = toks("the cataloging department of the Library");
        let (out, offsets) = ablate_pronouns(&tokens, &lex(), "they", AgreementMode::Basic).unwrap();
        assert_eq!(out, tokens);
        assert!(offsets.is_identity());
    }

    #[test]
    fn agreement_fix_present_tense() {
        let tokens = toks("She is here.");
        let (out, _) = ablate_pronouns(&tokens, &lex(), "they", AgreementMode::Basic).unwrap();
        assert_eq!(render_tokens(&out), "They are here.");
    }

    #[test]
    fn agreement_strips_third_person_s() {
        let tokens = toks("He works at night.");
        let (out, _) = ablate_pronouns(&tokens, &lex(), "they", AgreementMode::Basic).unwrap();
        assert_eq!(render_tokens(&out), "They work at night.");
    }

    #[test]
    fn ze_target_keeps_singular_agreement() {
        let tokens = toks("She is here.");
        let (out, _) = ablate_pronouns(&tokens, &lex(), "ze", default_agreement("ze")).unwrap();
        assert_eq!(render_tokens(&out), "Ze is here.");
    }

    #[test]
    fn gendered_target_is_rejected() {
        let tokens = toks("She is here.");
        assert!(ablate_pronouns(&tokens, &lex(), "he", AgreementMode::Off).is_err());
    }

    #[test]
    fn noun_substitution_and_capitalization() {
        let tokens = toks("Mother met the sister and brother.");
        let (out, _) = ablate_gendered_nouns(&tokens, &lex());
        assert_eq!(render_tokens(&out), "Parent met the sibling and sibling.");
    }

    #[test]
    fn plural_nouns_use_the_neutral_plural() {
        let tokens = toks("her sisters and businessmen");
        let (out, _) = ablate_gendered_nouns(&tokens, &lex());
        assert_eq!(render_tokens(&out), "her siblings and businesspeople");
    }

    #[test]
    fn multiword_neutral_form_expands_spans() {
        let tokens = toks("the policeman waved");
        let (out, offsets) = ablate_gendered_nouns(&tokens, &lex());
        assert_eq!(render_tokens(&out), "the police officer waved");
        assert_eq!(offsets.map_span(1, 2), (1, 3));
        assert_eq!(offsets.map_span(2, 3), (3, 4));
    }

    #[test]
    fn no_lexicon_hits_means_identity() {
        let tokens = toks("the cataloging department");
        let (out, offsets) = ablate_gendered_nouns(&tokens, &lex());
        assert_eq!(out, tokens);
        assert!(offsets.is_identity());
    }

    #[test]
    fn address_deletion_shifts_spans() {
        let tokens = toks("Mr. Kim met Mrs. Lee");
        let (out, offsets) = ablate_address_terms(&tokens, &lex());
        assert_eq!(render_tokens(&out), "Kim met Lee");
        assert_eq!(offsets.map_span(3, 5), (2, 3)); // "Mrs. Lee" -> "Lee"
        assert_eq!(offsets.map_index(0), 0); // deletion maps to the gap
    }

    #[test]
    fn name_replacement_is_consistent_and_seeded() {
        let tokens = toks("Rebekah Johnson Bobbitt met Rebekah Johnson Bobbitt");
        let seeds = vec![(0, 3)];
        let (out1, _, mapping1) = ablate_names(&tokens, &seeds, &lex(), &lex().name_pool, 11).unwrap();
        let (out2, _, mapping2) = ablate_names(&tokens, &seeds, &lex(), &lex().name_pool, 11).unwrap();
        assert_eq!(out1, out2);
        assert_eq!(mapping1, mapping2);
        assert_eq!(mapping1.len(), 1);
        let rendered = render_tokens(&out1);
        let parts: Vec<&str> = rendered.split(" met ").collect();
        assert_eq!(parts[0], parts[1], "same name must get the same replacement: {rendered}");
    }

    #[test]
    fn distinct_names_get_distinct_replacements() {
        let tokens = toks("Ana Cruz met Bo Diaz");
        let seeds = vec![(0, 2), (3, 5)];
        let (_, _, mapping) = ablate_names(&tokens, &seeds, &lex(), &lex().name_pool, 3).unwrap();
        let replacements: Vec<String> = mapping.iter().map(|(_, e)| e.render()).collect();
        assert_eq!(replacements.len(), 2);
        assert_ne!(replacements[0], replacements[1]);
    }

    #[test]
    fn pool_exhaustion_is_reported() {
        let tokens = toks("Ana Cruz met Bo Diaz");
        let seeds = vec![(0, 2), (3, 5)];
        let pool = NamePool { entries: vec![NameEntry { initial: "M.".into(), last_name: "Booth".into() }] };
        let err = ablate_names(&tokens, &seeds, &lex(), &pool, 3).unwrap_err();
        assert!(matches!(err, Error::PoolExhausted { needed: 2, available: 1 }));
    }

    #[test]
    fn possessive_clitic_is_preserved() {
        let tokens = toks("Johnson's car");
        let seeds = vec![(0, 1)];
        let pool = NamePool { entries: vec![NameEntry { initial: "T.".into(), last_name: "Schneider".into() }] };
        let (out, _, _) = ablate_names(&tokens, &seeds, &lex(), &pool, 0).unwrap();
        assert_eq!(render_tokens(&out), "T. Schneider's car");
    }

    #[test]
    fn pool_form_names_are_fixed_points() {
        let tokens = toks("M. Booth arrived");
        let seeds = vec![(0, 2)];
        let (out, _, _) = ablate_names(&tokens, &seeds, &lex(), &lex().name_pool, 99).unwrap();
        assert_eq!(render_tokens(&out), "M. Booth arrived");
    }

    #[test]
    fn mention_on_a_deleted_token_drops_from_the_document() {
        use crate::corpus::conll::{emit_conll, parse_conll};
        let text = "#begin document (drop); part 000\n\
                    drop 000 0 Mrs. NNP - - - - - * (3)\n\
                    drop 000 1 Lee NNP - - - - - * (4)\n\
                    drop 000 2 spoke VBD - - - - - * -\n\
                    \n#end document\n";
        let doc = parse_conll(text).unwrap().remove(0);
        let config = AblationConfig::preset(Preset::NotAddr, 0);
        let (out, _, _) = apply_config_document(&doc, &lex(), &config, None).unwrap();
        assert_eq!(render_tokens(&out.tokens), "Lee spoke");
        assert_eq!(out.mentions.len(), 1);
        assert_eq!((out.mentions[0].start, out.mentions[0].end), (0, 1));
        // Emitting and re-parsing the transformed document stays well formed.
        let back = parse_conll(&emit_conll(&out)).unwrap();
        assert_eq!(back[0].mentions, out.mentions);
    }

    #[test]
    fn offset_maps_are_monotone_and_total() {
        let tokens = toks("Mrs. Smith met her sister and the policeman yesterday");
        let lex = lex();
        for (_, offsets) in [
            ablate_address_terms(&tokens, &lex),
            ablate_gendered_nouns(&tokens, &lex),
        ] {
            assert_eq!(offsets.source_len(), tokens.len());
            let bounds: Vec<usize> = (0..=tokens.len()).map(|i| offsets.map_index(i)).collect();
            assert!(bounds.windows(2).all(|w| w[0] <= w[1]), "{bounds:?}");
        }
    }

    #[test]
    fn leading_honorific_is_not_part_of_the_name() {
        let tokens = toks("Mrs. Davis arrived");
        let pool = NamePool { entries: vec![NameEntry { initial: "M.".into(), last_name: "Booth".into() }] };
        let (out, _, mapping) = ablate_names(&tokens, &[(0, 2)], &lex(), &pool, 0).unwrap();
        assert_eq!(render_tokens(&out), "Mrs. M. Booth arrived");
        assert!(mapping.get("Davis").is_some());
    }
}
