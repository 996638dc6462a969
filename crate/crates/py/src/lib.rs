//! Python bindings: the corpus types, the ablation pipeline, and the
//! scoring/statistics entry points.

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use incoref::ablate::{apply_config, condition_suite, AblationConfig, Preset};
use incoref::coding::{load_codings, tabulate, Question};
use incoref::corpus::conll::{emit_conll, parse_conll};
use incoref::corpus::map::{emit_map, parse_map};
use incoref::corpus::stats::corpus_stats_instances;
use incoref::corpus::{Document, MapInstance};
use incoref::lexicon::Lexicon;
use incoref::score::{
    interannotator_agreement, lea, lea_corpus, pronoun_recall_by_category, ScoringMode,
};
use incoref::stats::{chisq_n_minus_1, wilson_interval, Proportion};

fn err(e: incoref::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Immutable cue inventory shared across calls.
#[pyclass(name = "Lexicon", frozen)]
struct PyLexicon {
    inner: Arc<Lexicon>,
}

#[pymethods]
impl PyLexicon {
    /// Lexicon shipped with the library.
    #[staticmethod]
    fn shipped() -> PyLexicon {
        PyLexicon { inner: Arc::new(Lexicon::shipped()) }
    }

    /// Load paradigms.tsv / nouns.tsv / address.tsv / names.tsv from a directory.
    #[staticmethod]
    fn load(dir: &str) -> PyResult<PyLexicon> {
        let lex = Lexicon::load(std::path::Path::new(dir)).map_err(err)?;
        Ok(PyLexicon { inner: Arc::new(lex) })
    }

    fn paradigm_ids(&self) -> Vec<String> {
        self.inner.paradigms.iter().map(|p| p.paradigm_id.clone()).collect()
    }

    fn noun_count(&self) -> usize {
        self.inner.nouns.len()
    }
}

#[pyclass(name = "Document", from_py_object)]
#[derive(Clone)]
struct PyDocument {
    inner: Document,
}

#[pymethods]
impl PyDocument {
    #[getter]
    fn doc_id(&self) -> &str {
        &self.inner.doc_id
    }

    fn tokens(&self) -> Vec<String> {
        self.inner.tokens.iter().map(|t| t.surface.clone()).collect()
    }

    fn text(&self) -> String {
        self.inner.text()
    }

    /// Clusters as {entity_id: [(start, end), ...]} over token spans.
    fn clusters(&self) -> BTreeMap<u32, Vec<(usize, usize)>> {
        self.inner
            .clusters()
            .into_iter()
            .map(|(id, ms)| (id, ms.iter().map(|m| (m.start, m.end)).collect()))
            .collect()
    }

    fn n_mentions(&self) -> usize {
        self.inner.mentions.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Document(doc_id={:?}, tokens={}, mentions={})",
            self.inner.doc_id,
            self.inner.tokens.len(),
            self.inner.mentions.len()
        )
    }
}

#[pyclass(name = "MapInstance", from_py_object)]
#[derive(Clone)]
struct PyMapInstance {
    inner: MapInstance,
}

#[pymethods]
impl PyMapInstance {
    #[getter]
    fn instance_id(&self) -> &str {
        &self.inner.instance_id
    }

    fn text(&self) -> String {
        self.inner.text()
    }

    #[getter]
    fn pronoun(&self) -> String {
        self.inner.span_text(&self.inner.pronoun_span)
    }

    #[getter]
    fn candidate_a(&self) -> String {
        self.inner.span_text(&self.inner.candidate_a_span)
    }

    #[getter]
    fn candidate_b(&self) -> String {
        self.inner.span_text(&self.inner.candidate_b_span)
    }

    /// Gold label: "A", "B", or "Neither".
    #[getter]
    fn gold(&self) -> &'static str {
        self.inner.gold_choice().as_str()
    }

    fn __repr__(&self) -> String {
        format!("MapInstance(instance_id={:?}, pronoun={:?})", self.inner.instance_id, self.pronoun())
    }
}

/// Parse CoNLL coreference text into documents.
#[pyfunction(name = "parse_conll")]
fn py_parse_conll(text: &str) -> PyResult<Vec<PyDocument>> {
    Ok(parse_conll(text).map_err(err)?.into_iter().map(|inner| PyDocument { inner }).collect())
}

/// Emit one document back to CoNLL text.
#[pyfunction(name = "emit_conll")]
fn py_emit_conll(doc: &PyDocument) -> String {
    emit_conll(&doc.inner)
}

/// Parse the tab-separated instance format.
#[pyfunction(name = "parse_map")]
fn py_parse_map(text: &str) -> PyResult<Vec<PyMapInstance>> {
    Ok(parse_map(text).map_err(err)?.into_iter().map(|inner| PyMapInstance { inner }).collect())
}

/// Emit instances back to the tab-separated format.
#[pyfunction(name = "emit_map")]
fn py_emit_map(instances: Vec<PyMapInstance>) -> String {
    let inner: Vec<MapInstance> = instances.into_iter().map(|i| i.inner).collect();
    emit_map(&inner)
}

/// All ten preset names in canonical order.
#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    Preset::ALL.iter().map(|p| p.as_str()).collect()
}

/// Apply one named condition to an instance.
#[pyfunction]
#[pyo3(signature = (instance, preset, lexicon, seed=0, target_paradigm="they"))]
fn apply_preset(
    instance: &PyMapInstance,
    preset: &str,
    lexicon: &PyLexicon,
    seed: u64,
    target_paradigm: &str,
) -> PyResult<PyMapInstance> {
    let preset = Preset::parse(preset).map_err(err)?;
    let config = AblationConfig::preset_with_target(preset, target_paradigm, seed);
    let out = apply_config(&instance.inner, &lexicon.inner, &config, None).map_err(err)?;
    Ok(PyMapInstance { inner: out.instance })
}

/// Generate all ten conditions; returns {preset_name: instance} plus the
/// name mapping {original: replacement}.
#[pyfunction]
#[pyo3(signature = (instance, lexicon, seed=0, target_paradigm="they"))]
fn suite(
    instance: &PyMapInstance,
    lexicon: &PyLexicon,
    seed: u64,
    target_paradigm: &str,
) -> PyResult<(BTreeMap<String, PyMapInstance>, BTreeMap<String, String>)> {
    let (variants, mapping) =
        condition_suite(&instance.inner, &lexicon.inner, seed, target_paradigm).map_err(err)?;
    let by_name = variants
        .into_iter()
        .map(|v| (v.preset.as_str().to_string(), PyMapInstance { inner: v.instance }))
        .collect();
    let names = mapping.iter().map(|(k, e)| (k.clone(), e.render())).collect();
    Ok((by_name, names))
}

/// LEA over two clusterings given as lists of lists of mention keys.
#[pyfunction]
fn lea_score(gold: Vec<Vec<String>>, system: Vec<Vec<String>>) -> (f64, f64, f64) {
    let s = lea(&gold, &system);
    (s.precision, s.recall, s.f1)
}

/// Corpus LEA between matched gold and system documents.
#[pyfunction]
#[pyo3(signature = (gold, system, lexicon, mode="exclude"))]
fn lea_documents(
    gold: Vec<PyDocument>,
    system: Vec<PyDocument>,
    lexicon: &PyLexicon,
    mode: &str,
) -> PyResult<(f64, f64, f64)> {
    let mode = ScoringMode::parse(mode).map_err(err)?;
    let gold: Vec<Document> = gold.into_iter().map(|d| d.inner).collect();
    let system: Vec<Document> = system.into_iter().map(|d| d.inner).collect();
    let s = lea_corpus(&gold, &system, &lexicon.inner, mode).map_err(err)?;
    Ok((s.precision, s.recall, s.f1))
}

/// Detection recall of gold pronouns by category:
/// {"binary"|"singular-they"|"neopronoun": (detected, gold, recall)}.
#[pyfunction]
fn pronoun_recall(
    gold: &PyDocument,
    system: &PyDocument,
    lexicon: &PyLexicon,
) -> PyResult<BTreeMap<String, (usize, usize, f64)>> {
    let recall = pronoun_recall_by_category(&gold.inner, &system.inner, &lexicon.inner).map_err(err)?;
    Ok(recall
        .per_category
        .into_iter()
        .map(|(cat, c)| (cat.to_string(), (c.detected, c.gold, c.recall().unwrap_or(0.0))))
        .collect())
}

/// LEA F1 treating annotation A as gold and B as system, and role-swapped.
#[pyfunction]
#[pyo3(signature = (annotation_a, annotation_b, mode="exclude"))]
fn iaa(annotation_a: Vec<PyDocument>, annotation_b: Vec<PyDocument>, mode: &str) -> PyResult<(f64, f64)> {
    let mode = ScoringMode::parse(mode).map_err(err)?;
    let a: Vec<Document> = annotation_a.into_iter().map(|d| d.inner).collect();
    let b: Vec<Document> = annotation_b.into_iter().map(|d| d.inner).collect();
    let report = interannotator_agreement(&a, &b, mode).map_err(err)?;
    Ok((report.f1_a_as_gold, report.f1_b_as_gold))
}

/// Wilson score interval.
#[pyfunction(name = "wilson_interval")]
#[pyo3(signature = (successes, trials, confidence=0.95))]
fn py_wilson_interval(successes: u64, trials: u64, confidence: f64) -> PyResult<(f64, f64)> {
    wilson_interval(successes, trials, confidence).map_err(err)
}

/// n-1 chi-squared on two proportions; returns (statistic, p_value, degenerate).
#[pyfunction(name = "chisq_n_minus_1")]
fn py_chisq(s1: u64, n1: u64, s2: u64, n2: u64) -> PyResult<(f64, f64, bool)> {
    let r = chisq_n_minus_1(Proportion::new(s1, n1), Proportion::new(s2, n2)).map_err(err)?;
    Ok((r.statistic, r.p_value, r.degenerate))
}

/// Cue-frequency statistics over instances.
#[pyfunction]
fn corpus_stats(instances: Vec<PyMapInstance>, lexicon: &PyLexicon) -> BTreeMap<String, f64> {
    let inner: Vec<MapInstance> = instances.into_iter().map(|i| i.inner).collect();
    let stats = corpus_stats_instances(&inner, &lexicon.inner);
    let mut out = BTreeMap::new();
    out.insert("n_instances".into(), stats.n_instances as f64);
    if let Some(v) = stats.frac_with_sem_nouns {
        out.insert("frac_with_sem_nouns".into(), v);
    }
    if let Some(v) = stats.frac_with_addr_terms {
        out.insert("frac_with_addr_terms".into(), v);
    }
    for (class, v) in stats.pronoun_category_distribution {
        out.insert(format!("pronoun_frac_{class}"), v);
    }
    out
}

/// Tabulate a codings CSV: {question_label: (percent, yes, denominator)};
/// subset is "all" or "coref".
#[pyfunction]
#[pyo3(signature = (csv_text, subset="all"))]
fn tabulate_codings(csv_text: &str, subset: &str) -> PyResult<BTreeMap<String, (f64, usize, usize)>> {
    let records = load_codings(csv_text.as_bytes()).map_err(err)?;
    let table = match subset {
        "all" => tabulate(&records, |_| true).map_err(err)?,
        "coref" => tabulate(&records, |r| r.is_yes(Question::Coref)).map_err(err)?,
        other => return Err(PyValueError::new_err(format!("unknown subset {other:?}"))),
    };
    Ok(table
        .per_question
        .iter()
        .map(|(q, s)| {
            (q.label().to_string(), (s.percent().unwrap_or(f64::NAN), s.yes, s.denominator))
        })
        .collect())
}

/// The codings fixture shipped with the library.
#[pyfunction]
fn default_codings_csv() -> &'static str {
    incoref::coding::DEFAULT_CODINGS_CSV
}

#[pymodule]
fn incoref_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLexicon>()?;
    m.add_class::<PyDocument>()?;
    m.add_class::<PyMapInstance>()?;
    m.add_function(wrap_pyfunction!(py_parse_conll, m)?)?;
    m.add_function(wrap_pyfunction!(py_emit_conll, m)?)?;
    m.add_function(wrap_pyfunction!(py_parse_map, m)?)?;
    m.add_function(wrap_pyfunction!(py_emit_map, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(apply_preset, m)?)?;
    m.add_function(wrap_pyfunction!(suite, m)?)?;
    m.add_function(wrap_pyfunction!(lea_score, m)?)?;
    m.add_function(wrap_pyfunction!(lea_documents, m)?)?;
    m.add_function(wrap_pyfunction!(pronoun_recall, m)?)?;
    m.add_function(wrap_pyfunction!(iaa, m)?)?;
    m.add_function(wrap_pyfunction!(py_wilson_interval, m)?)?;
    m.add_function(wrap_pyfunction!(py_chisq, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_stats, m)?)?;
    m.add_function(wrap_pyfunction!(tabulate_codings, m)?)?;
    m.add_function(wrap_pyfunction!(default_codings_csv, m)?)?;
    Ok(())
}
