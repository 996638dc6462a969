//! Annotation-task batch generation and result ingestion.
//!
//! The study design is between-subjects: every (instance, condition) pair
//! is annotated, but one batch (= one worker's task list) never shows the
//! same instance twice.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ablate::Preset;
use crate::corpus::{Choice, MapInstance};
use crate::error::{Error, Result};
use crate::score::{score_binary, AccuracyReport, BinaryPrediction};
use crate::stats::{certainty_summary, Certainty, CertaintyDist};

/// One item of a generated task batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskItem {
    pub batch_id: usize,
    pub item_index: usize,
    pub instance_id: String,
    pub condition: Preset,
    pub text: String,
    pub pronoun: String,
    pub candidate_a: String,
    pub candidate_b: String,
    /// Known-answer quality-check item appended to a batch; excluded from
    /// the condition-grid partition.
    pub is_gold_check: bool,
}

/// A full batch plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub items: Vec<TaskItem>,
    pub n_batches: usize,
    /// Set when the item count does not divide into full batches.
    pub short_batch: Option<usize>,
}

/// The condition variants of one instance, keyed by preset.
pub type ConditionVariants = BTreeMap<Preset, MapInstance>;

/// Generates task batches of `batch_size` items covering every requested
/// (instance, condition) pair exactly once. Assignment is seeded-random;
/// within a batch no instance repeats, so a worker annotating one batch
/// never sees two conditions of the same context.
pub fn gen_batches(
    variants: &[(String, ConditionVariants)],
    conditions: &[Preset],
    batch_size: usize,
    seed: u64,
) -> Result<BatchPlan> {
    gen_batches_with_gold_checks(variants, conditions, batch_size, seed, false)
}

/// [`gen_batches`] with optional known-answer quality-check items: one
/// extra unmodified-condition item per batch, over an instance the batch
/// does not already contain.
pub fn gen_batches_with_gold_checks(
    variants: &[(String, ConditionVariants)],
    conditions: &[Preset],
    batch_size: usize,
    seed: u64,
    gold_checks: bool,
) -> Result<BatchPlan> {
    if batch_size == 0 {
        return Err(Error::Invalid("batch size must be positive".into()));
    }
    if conditions.is_empty() {
        return Err(Error::Invalid("no conditions requested".into()));
    }
    for (instance_id, by_preset) in variants {
        for c in conditions {
            if !by_preset.contains_key(c) {
                return Err(Error::Invalid(format!(
                    "instance {instance_id:?} has no generated variant for condition {c}"
                )));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instance_order: Vec<usize> = (0..variants.len()).collect();
    instance_order.shuffle(&mut rng);
    let mut condition_order: Vec<Preset> = conditions.to_vec();
    condition_order.shuffle(&mut rng);

    let total_items = variants.len() * conditions.len();
    let n_batches = total_items.div_ceil(batch_size);
    let mut batch_instances: Vec<HashSet<usize>> = vec![HashSet::new(); n_batches];
    let mut batches: Vec<Vec<(usize, Preset)>> = vec![Vec::new(); n_batches];

    // Deal one condition at a time, rotating the starting batch, so
    // conditions spread evenly and an instance lands in distinct batches.
    let mut cursor = 0usize;
    for condition in &condition_order {
        for idx in &instance_order {
            let mut placed = false;
            for step in 0..n_batches {
                let b = (cursor + step) % n_batches;
                if batches[b].len() < batch_size && !batch_instances[b].contains(idx) {
                    batches[b].push((*idx, *condition));
                    batch_instances[b].insert(*idx);
                    cursor = (b + 1) % n_batches;
                    placed = true;
                    break;
                }
            }
            if !placed {
                // All non-full batches already contain this instance; open an
                // overflow batch rather than violate the no-repeat rule.
                batches.push(vec![(*idx, *condition)]);
                let mut set = HashSet::new();
                set.insert(*idx);
                batch_instances.push(set);
                cursor = 0;
            }
        }
    }

    let mut items = Vec::with_capacity(total_items);
    for (batch_id, batch) in batches.iter().enumerate() {
        for (item_index, (idx, condition)) in batch.iter().enumerate() {
            let (instance_id, by_preset) = &variants[*idx];
            let inst = &by_preset[condition];
            items.push(TaskItem {
                batch_id,
                item_index,
                instance_id: instance_id.clone(),
                condition: *condition,
                text: inst.text(),
                pronoun: inst.span_text(&inst.pronoun_span),
                candidate_a: inst.span_text(&inst.candidate_a_span),
                candidate_b: inst.span_text(&inst.candidate_b_span),
                is_gold_check: false,
            });
        }
        if gold_checks {
            let candidates: Vec<usize> =
                (0..variants.len()).filter(|i| !batch_instances[batch_id].contains(i)).collect();
            match candidates.choose(&mut rng) {
                Some(idx) => {
                    let (instance_id, by_preset) = &variants[*idx];
                    let inst = by_preset.get(&Preset::Orig).ok_or_else(|| {
                        Error::Invalid(format!(
                            "gold checks need an Orig variant for instance {instance_id:?}"
                        ))
                    })?;
                    items.push(TaskItem {
                        batch_id,
                        item_index: batch.len(),
                        instance_id: instance_id.clone(),
                        condition: Preset::Orig,
                        text: inst.text(),
                        pronoun: inst.span_text(&inst.pronoun_span),
                        candidate_a: inst.span_text(&inst.candidate_a_span),
                        candidate_b: inst.span_text(&inst.candidate_b_span),
                        is_gold_check: true,
                    });
                }
                None => log::warn!("batch {batch_id} already holds every instance; no gold check added"),
            }
        }
    }

    let short_batch = batches
        .iter()
        .enumerate()
        .find(|(_, b)| b.len() < batch_size)
        .map(|(i, _)| i);
    if let Some(b) = short_batch {
        log::warn!(
            "items do not divide into full batches; batch {b} holds {} of {batch_size}",
            batches[b].len()
        );
    }
    Ok(BatchPlan { items, n_batches: batches.len(), short_batch })
}

/// One row of a task answer key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerKeyRow {
    pub instance_id: String,
    pub condition: Preset,
    pub gold_choice: Choice,
}

/// Answer key for a batch plan: one row per task item, in item order.
pub fn answer_key(plan: &BatchPlan, gold: &[MapInstance]) -> Result<Vec<AnswerKeyRow>> {
    let gold_by_id: HashMap<&str, Choice> =
        gold.iter().map(|i| (i.instance_id.as_str(), i.gold_choice())).collect();
    plan.items
        .iter()
        .map(|item| {
            let choice = gold_by_id.get(item.instance_id.as_str()).ok_or_else(|| {
                Error::Invalid(format!("task item references unknown instance {:?}", item.instance_id))
            })?;
            Ok(AnswerKeyRow {
                instance_id: item.instance_id.clone(),
                condition: item.condition,
                gold_choice: *choice,
            })
        })
        .collect()
}

pub fn emit_answer_key(rows: &[AnswerKeyRow]) -> String {
    let mut s = String::from("instance_id,condition,gold_choice\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.instance_id, r.condition, r.gold_choice));
    }
    s
}

pub fn parse_answer_key(text: &str) -> Result<Vec<AnswerKeyRow>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let found: Vec<&str> = rdr.headers()?.iter().collect();
    if found != ["instance_id", "condition", "gold_choice"] {
        return Err(Error::Invalid(format!("answer key schema mismatch: {found:?}")));
    }
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 2;
        out.push(AnswerKeyRow {
            instance_id: record.get(0).unwrap_or("").to_string(),
            condition: Preset::parse(record.get(1).unwrap_or(""))
                .map_err(|e| Error::row(row.to_string(), e.to_string()))?,
            gold_choice: Choice::parse(record.get(2).unwrap_or(""))
                .map_err(|e| Error::row(row.to_string(), e.to_string()))?,
        });
    }
    Ok(out)
}

/// One completed annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub worker_id: String,
    pub instance_id: String,
    pub condition: Preset,
    pub choice: Choice,
    pub certainty: Certainty,
    pub duration_seconds: Option<f64>,
}

pub const RESULTS_HEADER: [&str; 6] =
    ["worker_id", "instance_id", "condition", "choice", "certainty", "duration_seconds"];

/// Ingests a results CSV, validating closed sets and rejecting duplicate
/// (worker, instance, condition) rows.
pub fn ingest_results<R: Read>(reader: R) -> Result<Vec<AnnotationRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let found: Vec<&str> = rdr.headers()?.iter().collect();
    if found != RESULTS_HEADER {
        return Err(Error::Invalid(format!(
            "results schema mismatch: expected {RESULTS_HEADER:?}, found {found:?}"
        )));
    }

    let mut out = Vec::new();
    let mut seen: HashMap<(String, String, Preset), usize> = HashMap::new();
    let mut duplicates: Vec<String> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2; // header is line 1
        let record = record.map_err(|e| Error::row(row.to_string(), e.to_string()))?;
        let field = |k: usize| record.get(k).unwrap_or("").trim().to_string();
        let condition = Preset::parse(&field(2)).map_err(|e| Error::row(row.to_string(), e.to_string()))?;
        let choice = Choice::parse(&field(3)).map_err(|e| Error::row(row.to_string(), e.to_string()))?;
        let certainty =
            Certainty::parse(&field(4)).map_err(|e| Error::row(row.to_string(), e.to_string()))?;
        let duration = {
            let raw = field(5);
            if raw.is_empty() {
                None
            } else {
                Some(raw.parse::<f64>().map_err(|_| {
                    Error::row(row.to_string(), format!("bad duration_seconds {raw:?}"))
                })?)
            }
        };
        let rec = AnnotationRecord {
            worker_id: field(0),
            instance_id: field(1),
            condition,
            choice,
            certainty,
            duration_seconds: duration,
        };
        let key = (rec.worker_id.clone(), rec.instance_id.clone(), rec.condition);
        if let Some(first) = seen.insert(key, row) {
            duplicates.push(format!(
                "rows {first} and {row}: worker {:?} instance {:?} condition {}",
                rec.worker_id, rec.instance_id, rec.condition
            ));
        }
        out.push(rec);
    }
    if !duplicates.is_empty() {
        return Err(Error::Invalid(format!(
            "duplicate (worker, instance, condition) annotations:\n  {}",
            duplicates.join("\n  ")
        )));
    }
    Ok(out)
}

/// Accuracy, interval, and certainty distribution for one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Preset,
    pub accuracy: AccuracyReport,
    pub certainty: CertaintyDist,
}

/// Joins annotation records to gold labels and reports accuracy plus the
/// certainty distribution per condition. Records are pooled across
/// workers; conditions with no records are omitted with a warning.
pub fn per_condition_report(
    records: &[AnnotationRecord],
    gold: &[MapInstance],
) -> Result<Vec<ConditionReport>> {
    let mut by_condition: BTreeMap<Preset, Vec<&AnnotationRecord>> = BTreeMap::new();
    for r in records {
        by_condition.entry(r.condition).or_default().push(r);
    }
    for preset in Preset::ALL {
        if !by_condition.contains_key(&preset) {
            log::warn!("condition {preset} has no annotation records; omitted from the report");
        }
    }

    let mut out = Vec::new();
    for (condition, recs) in by_condition {
        let predictions: Vec<BinaryPrediction> = recs
            .iter()
            .map(|r| BinaryPrediction {
                instance_id: r.instance_id.clone(),
                choice: r.choice,
                // Pool workers: accuracy is over records, not per worker.
                system_id: r.worker_id.clone(),
            })
            .collect();
        let reports = score_binary(&predictions, gold)?;
        let pooled = pool_reports(&reports)?;
        let pairs: Vec<(String, String)> = recs
            .iter()
            .map(|r| (condition.as_str().to_string(), r.certainty.as_str().to_string()))
            .collect();
        let certainty = certainty_summary(pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())))?
            .remove(condition.as_str())
            .expect("records for this condition exist");
        out.push(ConditionReport { condition, accuracy: pooled, certainty });
    }
    Ok(out)
}

fn pool_reports(reports: &[AccuracyReport]) -> Result<AccuracyReport> {
    let n_scored: usize = reports.iter().map(|r| r.n_scored).sum();
    let n_correct: usize = reports.iter().map(|r| r.n_correct).sum();
    let n_neither: usize = reports.iter().map(|r| r.n_neither_excluded).sum();
    let (low, high) = if n_scored > 0 {
        crate::stats::wilson_interval(n_correct as u64, n_scored as u64, 0.95)?
    } else {
        (0.0, 1.0)
    };
    Ok(AccuracyReport {
        system_id: "pooled".into(),
        n_scored,
        n_correct,
        n_neither_excluded: n_neither,
        accuracy: if n_scored > 0 { n_correct as f64 / n_scored as f64 } else { f64::NAN },
        interval_low: low,
        interval_high: high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ablate::condition_suite;
    use crate::corpus::map::parse_map;
    use crate::lexicon::Lexicon;

    fn instances(n: usize) -> Vec<MapInstance> {
        let mut tsv = String::from(
            "ID\tText\tPronoun\tPronoun-offset\tA\tA-offset\tA-coref\tB\tB-offset\tB-coref\tURL\n",
        );
        for i in 0..n {
            tsv.push_str(&format!(
                "i{i}\tMary Ito met Jan Cole before her shift.\ther\t29\tMary Ito\t0\tTRUE\tJan Cole\t13\tFALSE\turl\n"
            ));
        }
        parse_map(&tsv).unwrap()
    }

    fn variants_for(instances: &[MapInstance]) -> Vec<(String, ConditionVariants)> {
        let lex = Lexicon::shipped();
        instances
            .iter()
            .map(|inst| {
                let (suite, _) = condition_suite(inst, &lex, 7, "they").unwrap();
                let by_preset: ConditionVariants =
                    suite.into_iter().map(|v| (v.preset, v.instance)).collect();
                (inst.instance_id.clone(), by_preset)
            })
            .collect()
    }

    #[test]
    fn hundred_instances_one_condition_ten_batches() {
        let insts = instances(100);
        let variants = variants_for(&insts);
        let plan = gen_batches(&variants, &[Preset::Orig], 10, 7).unwrap();
        assert_eq!(plan.n_batches, 10);
        assert_eq!(plan.items.len(), 100);
        assert!(plan.short_batch.is_none());
    }

    #[test]
    fn batches_partition_the_grid_without_instance_repeats() {
        let insts = instances(12);
        let variants = variants_for(&insts);
        let plan = gen_batches(&variants, &Preset::ALL, 10, 3).unwrap();
        assert_eq!(plan.items.len(), 12 * 10);
        let mut grid: HashSet<(String, Preset)> = HashSet::new();
        let mut per_batch: HashMap<usize, HashSet<String>> = HashMap::new();
        for item in &plan.items {
            assert!(
                grid.insert((item.instance_id.clone(), item.condition)),
                "pair appears twice: {} {}",
                item.instance_id,
                item.condition
            );
            assert!(
                per_batch.entry(item.batch_id).or_default().insert(item.instance_id.clone()),
                "instance {} repeats in batch {}",
                item.instance_id,
                item.batch_id
            );
        }
        assert_eq!(grid.len(), 12 * 10);
    }

    #[test]
    fn same_seed_same_batches() {
        let insts = instances(20);
        let variants = variants_for(&insts);
        let a = gen_batches(&variants, &Preset::ALL, 10, 42).unwrap();
        let b = gen_batches(&variants, &Preset::ALL, 10, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_condition_variant_is_an_error() {
        let insts = instances(2);
        let mut variants = variants_for(&insts);
        variants[0].1.remove(&Preset::Zero);
        let err = gen_batches(&variants, &Preset::ALL, 10, 0).unwrap_err();
        assert!(err.to_string().contains("Zero"), "{err}");
    }

    fn results_csv(rows: &[&str]) -> String {
        let mut s = RESULTS_HEADER.join(",");
        s.push('\n');
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    #[test]
    fn ingest_valid_rows() {
        let csv = results_csv(&[
            "w1,i0,Zero,A,definitely,12.5",
            "w1,i1,Orig,B,probably,",
            "w2,i0,Zero,Neither,unsure,3",
        ]);
        let records = ingest_results(csv.as_bytes()).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].certainty, Certainty::Definitely);
        assert_eq!(records[1].duration_seconds, None);
    }

    #[test]
    fn ingest_rejects_duplicates_listing_them() {
        let csv = results_csv(&["w1,i0,Zero,A,definitely,", "w1,i0,Zero,B,unsure,"]);
        let err = ingest_results(csv.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("duplicate") && msg.contains("w1"), "{msg}");
    }

    #[test]
    fn ingest_rejects_unknown_condition_with_row() {
        let csv = results_csv(&["w1,i0,NotARealCondition,A,definitely,"]);
        let err = ingest_results(csv.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn uniform_random_guessing_lands_near_half() {
        use rand::Rng;
        use rand::SeedableRng;
        // Binomial oracle: with n = 600 fair guesses, accuracy deviates from
        // 0.5 by more than 5 sigma (~0.102) with probability < 1e-6.
        let n = 600;
        let insts = instances(n);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let rows: Vec<String> = (0..n)
            .map(|i| {
                let choice = if rng.random_bool(0.5) { "A" } else { "B" };
                format!("w{i},i{i},Zero,{choice},unsure,")
            })
            .collect();
        let csv = results_csv(&rows.iter().map(String::as_str).collect::<Vec<_>>());
        let records = ingest_results(csv.as_bytes()).unwrap();
        let report = per_condition_report(&records, &insts).unwrap();
        let accuracy = report[0].accuracy.accuracy;
        let sigma = 0.5 / (n as f64).sqrt();
        assert!((accuracy - 0.5).abs() < 5.0 * sigma, "accuracy {accuracy}");
    }

    #[test]
    fn gold_checks_add_one_orig_item_per_batch() {
        let insts = instances(12);
        let variants = variants_for(&insts);
        let plan =
            gen_batches_with_gold_checks(&variants, &Preset::ALL, 10, 3, true).unwrap();
        let checks: Vec<&TaskItem> = plan.items.iter().filter(|i| i.is_gold_check).collect();
        assert_eq!(checks.len(), plan.n_batches);
        for check in checks {
            assert_eq!(check.condition, Preset::Orig);
            let regulars_in_batch: Vec<&TaskItem> = plan
                .items
                .iter()
                .filter(|i| i.batch_id == check.batch_id && !i.is_gold_check)
                .collect();
            assert!(regulars_in_batch.iter().all(|i| i.instance_id != check.instance_id));
        }
    }

    #[test]
    fn answer_key_round_trip_is_lossless() {
        let insts = instances(8);
        let variants = variants_for(&insts);
        let plan = gen_batches(&variants, &[Preset::Orig, Preset::Zero], 4, 9).unwrap();
        let key = answer_key(&plan, &insts).unwrap();
        let back = parse_answer_key(&emit_answer_key(&key)).unwrap();
        assert_eq!(back, key);
        assert_eq!(key.len(), plan.items.len());
    }

    #[test]
    fn report_shows_known_accuracy() {
        let insts = instances(10);
        // 8 of 10 correct in Zero.
        let rows: Vec<String> = (0..10)
            .map(|i| {
                let choice = if i < 8 { "A" } else { "B" };
                format!("w{i},i{i},Zero,{choice},probably,")
            })
            .collect();
        let csv = results_csv(&rows.iter().map(String::as_str).collect::<Vec<_>>());
        let records = ingest_results(csv.as_bytes()).unwrap();
        let report = per_condition_report(&records, &insts).unwrap();
        assert_eq!(report.len(), 1);
        assert!((report[0].accuracy.accuracy - 0.8).abs() < 1e-12);
        assert_eq!(report[0].certainty.counts[&Certainty::Probably], 10);
    }
}
