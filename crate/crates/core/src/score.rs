//! Gender-inclusive evaluation: binary accuracy with Wilson intervals,
//! LEA with misgendering-aware modes, exact-match mention alignment,
//! per-pronoun-category recall, and inter-annotator agreement.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::corpus::{Choice, Document, MapInstance, MentionSpan};
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, PronounCategory};
use crate::stats::wilson_interval;

/// One system answer to one binary instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryPrediction {
    pub instance_id: String,
    pub choice: Choice,
    pub system_id: String,
}

/// Accuracy of one system over one instance set, with a 95% Wilson interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub system_id: String,
    pub n_scored: usize,
    pub n_correct: usize,
    /// Gold-neither instances are excluded from accuracy and counted here.
    pub n_neither_excluded: usize,
    pub accuracy: f64,
    pub interval_low: f64,
    pub interval_high: f64,
}

/// Scores per-system accuracy against gold instances. Gold "neither"
/// instances are excluded from the accuracy denominator and reported
/// separately. Duplicate predictions for one (instance, system) pair and
/// predictions for unknown instances are rejected.
pub fn score_binary(
    predictions: &[BinaryPrediction],
    gold: &[MapInstance],
) -> Result<Vec<AccuracyReport>> {
    if predictions.is_empty() {
        return Err(Error::Invalid("empty prediction set".into()));
    }
    let gold_by_id: HashMap<&str, &MapInstance> =
        gold.iter().map(|i| (i.instance_id.as_str(), i)).collect();

    let mut seen: HashMap<(&str, &str), ()> = HashMap::new();
    let mut per_system: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for pred in predictions {
        let inst = gold_by_id.get(pred.instance_id.as_str()).ok_or_else(|| {
            Error::Invalid(format!("prediction for unknown instance {:?}", pred.instance_id))
        })?;
        if seen
            .insert((pred.system_id.as_str(), pred.instance_id.as_str()), ())
            .is_some()
        {
            return Err(Error::Invalid(format!(
                "duplicate prediction for instance {:?} by system {:?}",
                pred.instance_id, pred.system_id
            )));
        }
        let entry = per_system.entry(pred.system_id.as_str()).or_insert((0, 0, 0));
        let gold_choice = inst.gold_choice();
        if gold_choice == Choice::Neither {
            entry.2 += 1;
            continue;
        }
        entry.0 += 1;
        if pred.choice == gold_choice {
            entry.1 += 1;
        }
    }

    per_system
        .into_iter()
        .map(|(system_id, (scored, correct, neither))| {
            let (low, high) = if scored > 0 {
                wilson_interval(correct as u64, scored as u64, 0.95)?
            } else {
                (0.0, 1.0)
            };
            Ok(AccuracyReport {
                system_id: system_id.to_string(),
                n_scored: scored,
                n_correct: correct,
                n_neither_excluded: neither,
                accuracy: if scored > 0 { correct as f64 / scored as f64 } else { f64::NAN },
                interval_low: low,
                interval_high: high,
            })
        })
        .collect()
}

/// Handling of mentions annotated as incorrect references (misgendering,
/// deadnaming) in gold documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMode {
    IncludeIncorrect,
    ExcludeIncorrect,
}

impl ScoringMode {
    pub fn parse(s: &str) -> Result<ScoringMode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "include" | "include_incorrect" => Ok(ScoringMode::IncludeIncorrect),
            "exclude" | "exclude_incorrect" => Ok(ScoringMode::ExcludeIncorrect),
            other => Err(Error::Invalid(format!("unknown scoring mode {other:?}"))),
        }
    }
}

/// Applies the incorrect-reference mode to a gold document: `exclude`
/// drops flagged mentions from their clusters, `include` keeps them as
/// ordinary members. Clusters reduced to one mention stay as singletons.
pub fn filter_incorrect_references(doc: &Document, mode: ScoringMode) -> Document {
    match mode {
        ScoringMode::IncludeIncorrect => doc.clone(),
        ScoringMode::ExcludeIncorrect => {
            let mut out = doc.clone();
            out.mentions.retain(|m| !m.incorrect_reference);
            out
        }
    }
}

/// Link count of an entity: C(n, 2) for n >= 2, and 1 for a singleton
/// (self-link), following the LEA reference convention.
fn link_count(n: usize) -> f64 {
    if n <= 1 {
        1.0
    } else {
        (n * (n - 1)) as f64 / 2.0
    }
}

/// LEA precision/recall/F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mode: Option<ScoringMode>,
}

/// Numerator/denominator pair for one side of LEA; sums across documents
/// before dividing, so corpus scores are importance-weighted rather than
/// averages of per-document F1s.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LeaParts {
    pub recall_num: f64,
    pub recall_den: f64,
    pub precision_num: f64,
    pub precision_den: f64,
}

impl LeaParts {
    pub fn add(&mut self, other: &LeaParts) {
        self.recall_num += other.recall_num;
        self.recall_den += other.recall_den;
        self.precision_num += other.precision_num;
        self.precision_den += other.precision_den;
    }

    pub fn score(&self, mode: Option<ScoringMode>) -> LeaScore {
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
        let recall = ratio(self.recall_num, self.recall_den);
        let precision = ratio(self.precision_num, self.precision_den);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        LeaScore { precision, recall, f1, mode }
    }
}

/// One side of LEA: weighted resolution score of `input` entities against
/// the `other` partition. Entity importance is its size; the resolution
/// score is the fraction of its links covered by the other partition. A
/// singleton resolves iff it appears as a singleton there too.
fn lea_side<M: Eq + Hash + Clone>(input: &[Vec<M>], other: &[Vec<M>]) -> (f64, f64) {
    let mut entity_of: HashMap<&M, usize> = HashMap::new();
    for (idx, cluster) in other.iter().enumerate() {
        for m in cluster {
            entity_of.insert(m, idx);
        }
    }

    let mut num = 0.0;
    let mut den = 0.0;
    for cluster in input {
        if cluster.is_empty() {
            continue;
        }
        let size = cluster.len();
        let covered = if size == 1 {
            match entity_of.get(&cluster[0]) {
                Some(idx) if other[*idx].len() == 1 => 1.0,
                _ => 0.0,
            }
        } else {
            let mut per_entity: HashMap<usize, usize> = HashMap::new();
            for m in cluster {
                if let Some(idx) = entity_of.get(m) {
                    *per_entity.entry(*idx).or_insert(0) += 1;
                }
            }
            per_entity
                .values()
                .map(|n| if *n >= 2 { (n * (n - 1)) as f64 / 2.0 } else { 0.0 })
                .sum()
        };
        num += size as f64 * covered / link_count(size);
        den += size as f64;
    }
    (num, den)
}

/// LEA over one pair of partitions (gold and system clusters share a
/// mention universe).
pub fn lea_parts<M: Eq + Hash + Clone>(gold: &[Vec<M>], system: &[Vec<M>]) -> LeaParts {
    let (recall_num, recall_den) = lea_side(gold, system);
    let (precision_num, precision_den) = lea_side(system, gold);
    LeaParts { recall_num, recall_den, precision_num, precision_den }
}

/// LEA score for a single partition pair. Empty sides score zero.
pub fn lea<M: Eq + Hash + Clone>(gold: &[Vec<M>], system: &[Vec<M>]) -> LeaScore {
    if gold.is_empty() || system.is_empty() {
        log::warn!("LEA on an empty partition; scores default to 0");
    }
    lea_parts(gold, system).score(None)
}

/// Clusters over span-keyed mentions after exact-match alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedClusters {
    pub gold: Vec<Vec<(usize, usize)>>,
    pub system: Vec<Vec<(usize, usize)>>,
    pub n_gold_mentions: usize,
    pub n_system_mentions: usize,
}

fn is_pronoun_mention(doc: &Document, m: &MentionSpan, lexicon: &Lexicon) -> bool {
    m.len() == 1 && lexicon.is_pronoun_form(&doc.tokens[m.start].surface)
}

/// Restricts both documents to mentions that are pronouns or name spans and
/// keys them by exact span, the only correspondence Table-style LEA scoring
/// counts. Mentions that are neither are dropped before scoring.
pub fn align_mentions(
    gold: &Document,
    system: &Document,
    lexicon: &Lexicon,
) -> Result<AlignedClusters> {
    let gold_tokens: Vec<&str> = gold.tokens.iter().map(|t| t.surface.as_str()).collect();
    let sys_tokens: Vec<&str> = system.tokens.iter().map(|t| t.surface.as_str()).collect();
    if gold_tokens != sys_tokens {
        return Err(Error::Invalid(format!(
            "token sequences differ between gold and system for {:?}",
            gold.doc_id
        )));
    }

    let keep = |doc: &Document, m: &MentionSpan| {
        is_pronoun_mention(doc, m, lexicon) || crate::ablate::is_name_span(&doc.tokens, m)
    };

    let project = |doc: &Document| -> Vec<Vec<(usize, usize)>> {
        let mut clusters: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
        for m in &doc.mentions {
            if let Some(id) = m.entity_id {
                if !m.is_empty() && m.end <= doc.tokens.len() && keep(doc, m) {
                    clusters.entry(id).or_default().push((m.start, m.end));
                }
            }
        }
        clusters
            .into_values()
            .map(|mut spans| {
                spans.sort();
                spans.dedup();
                spans
            })
            .filter(|spans| !spans.is_empty())
            .collect()
    };

    let gold_clusters = project(gold);
    let system_clusters = project(system);
    Ok(AlignedClusters {
        n_gold_mentions: gold_clusters.iter().map(Vec::len).sum(),
        n_system_mentions: system_clusters.iter().map(Vec::len).sum(),
        gold: gold_clusters,
        system: system_clusters,
    })
}

/// Scores a system document against gold under the chosen mode: exact-match
/// alignment, then LEA.
pub fn lea_document(
    gold: &Document,
    system: &Document,
    lexicon: &Lexicon,
    mode: ScoringMode,
) -> Result<LeaParts> {
    let gold = filter_incorrect_references(gold, mode);
    let aligned = align_mentions(&gold, system, lexicon)?;
    Ok(lea_parts(&aligned.gold, &aligned.system))
}

/// Corpus LEA: documents are matched by id, per-document numerators and
/// denominators are summed.
pub fn lea_corpus(
    gold_docs: &[Document],
    system_docs: &[Document],
    lexicon: &Lexicon,
    mode: ScoringMode,
) -> Result<LeaScore> {
    let sys_by_id: HashMap<&str, &Document> =
        system_docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut total = LeaParts::default();
    for gold in gold_docs {
        let system = sys_by_id.get(gold.doc_id.as_str()).ok_or_else(|| {
            Error::Invalid(format!("system output missing document {:?}", gold.doc_id))
        })?;
        total.add(&lea_document(gold, system, lexicon, mode)?);
    }
    Ok(total.score(Some(mode)))
}

/// Detected/gold counts for one pronoun category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecallCount {
    pub detected: usize,
    pub gold: usize,
}

impl RecallCount {
    pub fn recall(&self) -> Option<f64> {
        if self.gold == 0 {
            None
        } else {
            Some(self.detected as f64 / self.gold as f64)
        }
    }
}

/// Recall of referential-pronoun detection by category, regardless of
/// whether the pronoun is linked correctly.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryRecall {
    pub per_category: BTreeMap<PronounCategory, RecallCount>,
}

impl CategoryRecall {
    pub fn add(&mut self, other: &CategoryRecall) {
        for (cat, count) in &other.per_category {
            let entry = self.per_category.entry(*cat).or_default();
            entry.detected += count.detected;
            entry.gold += count.gold;
        }
    }
}

/// For each gold pronoun mention, the pronoun counts as detected iff any
/// system mention covers exactly that token.
pub fn pronoun_recall_by_category(
    gold: &Document,
    system: &Document,
    lexicon: &Lexicon,
) -> Result<CategoryRecall> {
    let gold_tokens: Vec<&str> = gold.tokens.iter().map(|t| t.surface.as_str()).collect();
    let sys_tokens: Vec<&str> = system.tokens.iter().map(|t| t.surface.as_str()).collect();
    if gold_tokens != sys_tokens {
        return Err(Error::Invalid(format!(
            "token sequences differ between gold and system for {:?}",
            gold.doc_id
        )));
    }
    let system_spans: std::collections::HashSet<(usize, usize)> =
        system.mentions.iter().map(|m| (m.start, m.end)).collect();

    let mut out = CategoryRecall::default();
    for m in &gold.mentions {
        if !is_pronoun_mention(gold, m, lexicon) {
            continue;
        }
        let candidates = lexicon.pronoun_candidates(&gold.tokens[m.start].surface);
        let category = lexicon.paradigms[candidates[0].0].category;
        let entry = out.per_category.entry(category).or_default();
        entry.gold += 1;
        if system_spans.contains(&(m.start, m.end)) {
            entry.detected += 1;
        }
    }
    Ok(out)
}

/// Corpus-level category recall; documents matched by id.
pub fn pronoun_recall_corpus(
    gold_docs: &[Document],
    system_docs: &[Document],
    lexicon: &Lexicon,
) -> Result<CategoryRecall> {
    let sys_by_id: HashMap<&str, &Document> =
        system_docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut total = CategoryRecall::default();
    for gold in gold_docs {
        let system = sys_by_id.get(gold.doc_id.as_str()).ok_or_else(|| {
            Error::Invalid(format!("system output missing document {:?}", gold.doc_id))
        })?;
        total.add(&pronoun_recall_by_category(gold, system, lexicon)?);
    }
    Ok(total)
}

/// Inter-annotator agreement via LEA, reported in both role assignments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IaaReport {
    /// LEA F1 with annotation A as gold and B as system.
    pub f1_a_as_gold: f64,
    /// LEA F1 with the roles swapped.
    pub f1_b_as_gold: f64,
}

/// Treats one annotation layer as gold and the other as system output and
/// computes LEA over full mention sets (no pronoun/name filtering: both
/// sides are human annotations of the same text).
pub fn interannotator_agreement(
    annotation_a: &[Document],
    annotation_b: &[Document],
    mode: ScoringMode,
) -> Result<IaaReport> {
    let b_by_id: HashMap<&str, &Document> =
        annotation_b.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let a_ids: Vec<&str> = annotation_a.iter().map(|d| d.doc_id.as_str()).collect();
    if a_ids.len() != annotation_b.len() || a_ids.iter().any(|id| !b_by_id.contains_key(id)) {
        return Err(Error::Invalid("annotation layers cover different document sets".into()));
    }

    let mut forward = LeaParts::default();
    for a in annotation_a {
        let b = b_by_id[a.doc_id.as_str()];
        let a = filter_incorrect_references(a, mode);
        let b = filter_incorrect_references(b, mode);
        let a_clusters: Vec<Vec<(usize, usize)>> =
            a.clusters().into_values().map(|ms| ms.iter().map(|m| (m.start, m.end)).collect()).collect();
        let b_clusters: Vec<Vec<(usize, usize)>> =
            b.clusters().into_values().map(|ms| ms.iter().map(|m| (m.start, m.end)).collect()).collect();
        forward.add(&lea_parts(&a_clusters, &b_clusters));
    }
    let f1_a_as_gold = forward.score(Some(mode)).f1;
    // Role symmetry: swapping roles swaps precision and recall, so F1 can be
    // derived without a second pass; recompute explicitly for the report.
    let swapped = LeaParts {
        recall_num: forward.precision_num,
        recall_den: forward.precision_den,
        precision_num: forward.recall_num,
        precision_den: forward.recall_den,
    };
    Ok(IaaReport { f1_a_as_gold, f1_b_as_gold: swapped.score(Some(mode)).f1 })
}
