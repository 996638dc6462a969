//! Command-line driver for corpus ablation, scoring, and study tooling.
//!
//! Every command is deterministic given its inputs, flags, and seed, and
//! re-running overwrites outputs byte-identically (writes are atomic).
//! Exit codes: 0 success, 1 data error, 2 usage error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use incoref::ablate::{
    apply_config_document, build_name_mapping, condition_suite, instance_seed,
    name_spans_for_document, AblationConfig, AgreementMode, NameMapping, Preset,
};
use incoref::coding::{compare_groups, load_codings, tabulate, Question, DEFAULT_CODINGS_CSV};
use incoref::corpus::conll::{emit_conll_all, parse_conll};
use incoref::corpus::map::{emit_map, parse_map};
use incoref::corpus::stats::{corpus_stats_documents, corpus_stats_instances, CorpusStats};
use incoref::corpus::{Choice, Document, MapInstance};
use incoref::lexicon::Lexicon;
use incoref::report::{svg_bar_chart, write_atomic, BarRow};
use incoref::score::{
    interannotator_agreement, lea_document, pronoun_recall_corpus, score_binary, AccuracyReport,
    BinaryPrediction, LeaParts, ScoringMode,
};
use incoref::tasks::{
    answer_key, emit_answer_key, gen_batches_with_gold_checks, ingest_results,
    per_condition_report, ConditionVariants,
};

#[derive(Parser)]
#[command(name = "incoref", version, about = "Gender-inclusive coreference toolkit")]
struct Cli {
    /// Worker threads for corpus-parallel commands (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Map,
    Conll,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Include,
    Exclude,
}

impl From<ModeArg> for ScoringMode {
    fn from(m: ModeArg) -> ScoringMode {
        match m {
            ModeArg::Include => ScoringMode::IncludeIncorrect,
            ModeArg::Exclude => ScoringMode::ExcludeIncorrect,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AgreementArg {
    Auto,
    Off,
    Basic,
}

#[derive(Args)]
struct LexiconArg {
    /// Directory with paradigms.tsv, nouns.tsv, address.tsv, names.tsv;
    /// defaults to the shipped lexicon.
    #[arg(long)]
    lexicon_dir: Option<PathBuf>,
}

impl LexiconArg {
    fn load(&self) -> Result<Lexicon> {
        match &self.lexicon_dir {
            None => Ok(Lexicon::shipped()),
            Some(dir) => {
                if !dir.is_dir() {
                    // Usage error: the flag points nowhere.
                    eprintln!("error: --lexicon-dir {} is not a directory", dir.display());
                    std::process::exit(2);
                }
                Ok(Lexicon::load(dir)?)
            }
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,

    /// Report formats to emit.
    #[arg(long, value_delimiter = ',', default_values_t = vec![Format::Csv, Format::Json])]
    format: Vec<Format>,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate ablated condition files from a corpus.
    Ablate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        input_format: Option<InputFormat>,
        /// Conditions to generate (repeat or comma-separate); default all ten.
        #[arg(long, value_delimiter = ',')]
        preset: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replacement paradigm for the pronoun substitution.
        #[arg(long, default_value = "they")]
        target_paradigm: String,
        #[arg(long, value_enum, default_value_t = AgreementArg::Auto)]
        agreement: AgreementArg,
        #[command(flatten)]
        lexicon: LexiconArg,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Score binary pronoun-resolution predictions against gold instances.
    ScoreMap {
        #[arg(long)]
        gold: PathBuf,
        /// CSV with header instance_id,system_id,choice.
        #[arg(long)]
        predictions: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Score system coreference output against gold with LEA.
    ScoreCoref {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Exclude)]
        mode: ModeArg,
        #[command(flatten)]
        lexicon: LexiconArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recall of referential-pronoun detection by paradigm category.
    RecallByPronoun {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        lexicon: LexiconArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Inter-annotator agreement between two annotation layers.
    Iaa {
        #[arg(long)]
        annotation_a: PathBuf,
        #[arg(long)]
        annotation_b: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Exclude)]
        mode: ModeArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cue-frequency statistics over a corpus.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        input_format: Option<InputFormat>,
        #[command(flatten)]
        lexicon: LexiconArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Generate annotation task batches over the condition grid.
    GenTasks {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        conditions: Vec<String>,
        #[arg(long, default_value_t = 10)]
        batch_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "they")]
        target_paradigm: String,
        /// Append one known-answer quality-check item per batch.
        #[arg(long)]
        gold_checks: bool,
        #[command(flatten)]
        lexicon: LexiconArg,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Validate a completed-results CSV and write normalized records.
    IngestResults {
        #[arg(long)]
        results: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate literature codings and run the significance comparisons.
    CodePapers {
        /// Codings CSV; defaults to the shipped annotation fixture.
        #[arg(long)]
        codings: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Per-condition accuracy and certainty report from annotation results.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.jobs != 1 {
        let threads = if cli.jobs == 0 { num_threads_all() } else { cli.jobs };
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().ok();
    }
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn num_threads_all() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ablate { input, input_format, preset, seed, target_paradigm, agreement, lexicon, out_dir } => {
            cmd_ablate(&input, input_format, &preset, seed, &target_paradigm, agreement, &lexicon, &out_dir)
        }
        Command::ScoreMap { gold, predictions, output } => cmd_score_map(&gold, &predictions, &output),
        Command::ScoreCoref { gold, system, mode, lexicon, output } => {
            cmd_score_coref(&gold, &system, mode.into(), &lexicon, &output)
        }
        Command::RecallByPronoun { gold, system, lexicon, output } => {
            cmd_recall(&gold, &system, &lexicon, &output)
        }
        Command::Iaa { annotation_a, annotation_b, mode, output } => {
            cmd_iaa(&annotation_a, &annotation_b, mode.into(), &output)
        }
        Command::Stats { input, input_format, lexicon, output } => {
            cmd_stats(&input, input_format, &lexicon, &output)
        }
        Command::GenTasks { input, conditions, batch_size, seed, target_paradigm, gold_checks, lexicon, out_dir } => {
            cmd_gen_tasks(&input, &conditions, batch_size, seed, &target_paradigm, gold_checks, &lexicon, &out_dir)
        }
        Command::IngestResults { results, output } => cmd_ingest(&results, &output),
        Command::CodePapers { codings, output } => cmd_code_papers(codings.as_deref(), &output),
        Command::Report { results, gold, output } => cmd_report(&results, &gold, &output),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn guess_format(path: &Path, explicit: Option<InputFormat>) -> InputFormat {
    explicit.unwrap_or_else(|| {
        match path.extension().and_then(|e| e.to_str()).unwrap_or("") {
            "tsv" | "csv" => InputFormat::Map,
            _ => InputFormat::Conll,
        }
    })
}

fn parse_presets(names: &[String]) -> Result<Vec<Preset>> {
    if names.is_empty() || names.iter().any(|n| n.eq_ignore_ascii_case("all")) {
        return Ok(Preset::ALL.to_vec());
    }
    Ok(names.iter().map(|n| Preset::parse(n)).collect::<incoref::Result<_>>()?)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("input").to_string()
}

#[allow(clippy::too_many_arguments)]
fn cmd_ablate(
    input: &Path,
    input_format: Option<InputFormat>,
    preset_names: &[String],
    seed: u64,
    target_paradigm: &str,
    agreement: AgreementArg,
    lexicon: &LexiconArg,
    out_dir: &Path,
) -> Result<()> {
    let lexicon = lexicon.load()?;
    let presets = parse_presets(preset_names)?;
    let stem = file_stem(input);
    let text = read(input)?;

    let agreement_mode = match agreement {
        AgreementArg::Auto => incoref::ablate::default_agreement(target_paradigm),
        AgreementArg::Off => AgreementMode::Off,
        AgreementArg::Basic => AgreementMode::Basic,
    };

    match guess_format(input, input_format) {
        InputFormat::Map => {
            let instances = parse_map(&text)?;
            let mut sidecar: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
            let mut per_preset: BTreeMap<Preset, Vec<MapInstance>> =
                presets.iter().map(|p| (*p, Vec::new())).collect();
            let suites: Vec<_> = instances
                .par_iter()
                .map(|inst| condition_suite(inst, &lexicon, seed, target_paradigm))
                .collect();
            for (inst, suite) in instances.iter().zip(suites) {
                let (variants, mapping) = suite?;
                sidecar.insert(
                    inst.instance_id.clone(),
                    mapping.iter().map(|(k, e)| (k.clone(), e.render())).collect(),
                );
                for v in variants {
                    if let Some(bucket) = per_preset.get_mut(&v.preset) {
                        bucket.push(v.instance);
                    }
                }
            }
            for (preset, insts) in &per_preset {
                let path = out_dir.join(format!("{stem}.{preset}.tsv"));
                write_atomic(&path, emit_map(insts).as_bytes())?;
                println!("wrote {}", path.display());
            }
            let sidecar_path = out_dir.join(format!("{stem}.name_map.json"));
            write_atomic(&sidecar_path, serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
            println!("wrote {}", sidecar_path.display());
        }
        InputFormat::Conll => {
            let docs = parse_conll(&text)?;
            let mut sidecar: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
            let mut mappings: BTreeMap<String, NameMapping> = BTreeMap::new();
            for doc in &docs {
                let spans = name_spans_for_document(doc, &lexicon);
                let mapping =
                    build_name_mapping(&spans, &lexicon.name_pool, instance_seed(seed, &doc.doc_id))?;
                sidecar.insert(
                    doc.doc_id.clone(),
                    mapping.iter().map(|(k, e)| (k.clone(), e.render())).collect(),
                );
                mappings.insert(doc.doc_id.clone(), mapping);
            }
            for preset in &presets {
                let mut config = AblationConfig::preset_with_target(*preset, target_paradigm, seed);
                config.agreement_mode = agreement_mode;
                let transformed: Vec<Document> = docs
                    .par_iter()
                    .map(|doc| {
                        apply_config_document(doc, &lexicon, &config, Some(&mappings[&doc.doc_id]))
                            .map(|(d, _, _)| d)
                    })
                    .collect::<incoref::Result<_>>()?;
                let path = out_dir.join(format!("{stem}.{preset}.conll"));
                write_atomic(&path, emit_conll_all(&transformed).as_bytes())?;
                println!("wrote {}", path.display());
            }
            let sidecar_path = out_dir.join(format!("{stem}.name_map.json"));
            write_atomic(&sidecar_path, serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
            println!("wrote {}", sidecar_path.display());
        }
    }
    Ok(())
}

fn read_predictions(path: &Path) -> Result<Vec<BinaryPrediction>> {
    let mut rdr = csv::ReaderBuilder::new().from_path(path)?;
    let found: Vec<&str> = rdr.headers()?.iter().collect();
    if found != ["instance_id", "system_id", "choice"] {
        bail!("predictions header must be instance_id,system_id,choice (found {found:?})");
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        out.push(BinaryPrediction {
            instance_id: record.get(0).unwrap_or("").to_string(),
            system_id: record.get(1).unwrap_or("").to_string(),
            choice: Choice::parse(record.get(2).unwrap_or(""))?,
        });
    }
    Ok(out)
}

fn accuracy_csv(reports: &[AccuracyReport]) -> String {
    let mut s =
        String::from("system_id,n_scored,n_correct,n_neither_excluded,accuracy,interval_low,interval_high\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{:.6}\n",
            r.system_id, r.n_scored, r.n_correct, r.n_neither_excluded, r.accuracy, r.interval_low,
            r.interval_high
        ));
    }
    s
}

fn emit_reports<T: serde::Serialize>(
    output: &OutputArgs,
    base: &str,
    csv_text: Option<String>,
    value: &T,
    chart: Option<String>,
) -> Result<()> {
    for format in &output.format {
        match format {
            Format::Csv => {
                if let Some(csv_text) = &csv_text {
                    let path = output.out_dir.join(format!("{base}.csv"));
                    write_atomic(&path, csv_text.as_bytes())?;
                    println!("wrote {}", path.display());
                }
            }
            Format::Json => {
                let path = output.out_dir.join(format!("{base}.json"));
                write_atomic(&path, serde_json::to_string_pretty(value)?.as_bytes())?;
                println!("wrote {}", path.display());
            }
            Format::Svg => {
                if let Some(chart) = &chart {
                    let path = output.out_dir.join(format!("{base}.svg"));
                    write_atomic(&path, chart.as_bytes())?;
                    println!("wrote {}", path.display());
                }
            }
        }
    }
    Ok(())
}

fn cmd_score_map(gold: &Path, predictions: &Path, output: &OutputArgs) -> Result<()> {
    let instances = parse_map(&read(gold)?)?;
    let predictions = read_predictions(predictions)?;
    let reports = score_binary(&predictions, &instances)?;
    for r in &reports {
        println!(
            "{}: accuracy {:.4} [{:.4}, {:.4}] over {} instances ({} gold-neither excluded)",
            r.system_id, r.accuracy, r.interval_low, r.interval_high, r.n_scored, r.n_neither_excluded
        );
    }
    let chart = svg_bar_chart(
        "binary accuracy",
        &reports
            .iter()
            .map(|r| BarRow {
                label: r.system_id.clone(),
                value: r.accuracy,
                low: Some(r.interval_low),
                high: Some(r.interval_high),
            })
            .collect::<Vec<_>>(),
    );
    emit_reports(output, "score_map", Some(accuracy_csv(&reports)), &reports, Some(chart))
}

fn cmd_score_coref(
    gold: &Path,
    system: &Path,
    mode: ScoringMode,
    lexicon: &LexiconArg,
    output: &OutputArgs,
) -> Result<()> {
    let lexicon = lexicon.load()?;
    let gold_docs = parse_conll(&read(gold)?)?;
    let system_docs = parse_conll(&read(system)?)?;
    let sys_by_id: BTreeMap<&str, &Document> =
        system_docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let parts: Vec<LeaParts> = gold_docs
        .par_iter()
        .map(|g| {
            let s = sys_by_id.get(g.doc_id.as_str()).ok_or_else(|| {
                incoref::Error::Invalid(format!("system output missing {:?}", g.doc_id))
            })?;
            lea_document(g, s, &lexicon, mode)
        })
        .collect::<incoref::Result<_>>()?;
    let mut total = LeaParts::default();
    for p in &parts {
        total.add(p);
    }
    let score = total.score(Some(mode));
    println!(
        "LEA ({mode:?}): P {:.4} R {:.4} F1 {:.4} over {} documents",
        score.precision,
        score.recall,
        score.f1,
        gold_docs.len()
    );
    let csv_text = format!(
        "mode,precision,recall,f1\n{:?},{:.6},{:.6},{:.6}\n",
        mode, score.precision, score.recall, score.f1
    );
    let chart = svg_bar_chart(
        "LEA",
        &[
            BarRow { label: "precision".into(), value: score.precision, low: None, high: None },
            BarRow { label: "recall".into(), value: score.recall, low: None, high: None },
            BarRow { label: "F1".into(), value: score.f1, low: None, high: None },
        ],
    );
    emit_reports(output, "score_coref", Some(csv_text), &score, Some(chart))
}

fn cmd_recall(gold: &Path, system: &Path, lexicon: &LexiconArg, output: &OutputArgs) -> Result<()> {
    let lexicon = lexicon.load()?;
    let gold_docs = parse_conll(&read(gold)?)?;
    let system_docs = parse_conll(&read(system)?)?;
    let recall = pronoun_recall_corpus(&gold_docs, &system_docs, &lexicon)?;
    let mut csv_text = String::from("category,detected,gold,recall\n");
    let mut rows = Vec::new();
    for (cat, count) in &recall.per_category {
        let r = count.recall().unwrap_or(0.0);
        println!("{cat}: {}/{} = {r:.4}", count.detected, count.gold);
        csv_text.push_str(&format!("{cat},{},{},{r:.6}\n", count.detected, count.gold));
        rows.push(BarRow { label: cat.to_string(), value: r, low: None, high: None });
    }
    let chart = svg_bar_chart("pronoun recall by category", &rows);
    emit_reports(output, "recall_by_pronoun", Some(csv_text), &recall, Some(chart))
}

fn cmd_iaa(a: &Path, b: &Path, mode: ScoringMode, output: &OutputArgs) -> Result<()> {
    let docs_a = parse_conll(&read(a)?)?;
    let docs_b = parse_conll(&read(b)?)?;
    let report = interannotator_agreement(&docs_a, &docs_b, mode)?;
    println!(
        "IAA LEA F1: {:.4} (A as gold), {:.4} (B as gold)",
        report.f1_a_as_gold, report.f1_b_as_gold
    );
    let csv_text = format!(
        "direction,f1\nA_as_gold,{:.6}\nB_as_gold,{:.6}\n",
        report.f1_a_as_gold, report.f1_b_as_gold
    );
    emit_reports(output, "iaa", Some(csv_text), &report, None)
}

fn stats_csv(stats: &CorpusStats) -> String {
    let mut s = String::from("metric,value\n");
    s.push_str(&format!("n_instances,{}\n", stats.n_instances));
    if let Some(v) = stats.frac_with_sem_nouns {
        s.push_str(&format!("frac_with_sem_nouns,{v:.6}\n"));
    }
    if let Some(v) = stats.frac_with_addr_terms {
        s.push_str(&format!("frac_with_addr_terms,{v:.6}\n"));
    }
    for (class, v) in &stats.pronoun_category_distribution {
        s.push_str(&format!("pronoun_frac_{class},{v:.6}\n"));
    }
    s
}

fn cmd_stats(
    input: &Path,
    input_format: Option<InputFormat>,
    lexicon: &LexiconArg,
    output: &OutputArgs,
) -> Result<()> {
    let lexicon = lexicon.load()?;
    let text = read(input)?;
    let stats = match guess_format(input, input_format) {
        InputFormat::Map => corpus_stats_instances(&parse_map(&text)?, &lexicon),
        InputFormat::Conll => corpus_stats_documents(&parse_conll(&text)?, &lexicon),
    };
    println!("{}", serde_json::to_string_pretty(&stats)?);
    emit_reports(output, "stats", Some(stats_csv(&stats)), &stats, None)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen_tasks(
    input: &Path,
    condition_names: &[String],
    batch_size: usize,
    seed: u64,
    target_paradigm: &str,
    gold_checks: bool,
    lexicon: &LexiconArg,
    out_dir: &Path,
) -> Result<()> {
    let lexicon = lexicon.load()?;
    let conditions = parse_presets(condition_names)?;
    let instances = parse_map(&read(input)?)?;

    let mut variants: Vec<(String, ConditionVariants)> = Vec::new();
    for inst in &instances {
        let (suite, _) = condition_suite(inst, &lexicon, seed, target_paradigm)?;
        let by_preset: ConditionVariants =
            suite.into_iter().map(|v| (v.preset, v.instance)).collect();
        variants.push((inst.instance_id.clone(), by_preset));
    }
    let plan = gen_batches_with_gold_checks(&variants, &conditions, batch_size, seed, gold_checks)?;

    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record([
        "batch_id", "item_index", "instance_id", "condition", "text", "pronoun", "candidate_a",
        "candidate_b", "is_gold_check",
    ])?;
    for item in &plan.items {
        w.write_record([
            item.batch_id.to_string(),
            item.item_index.to_string(),
            item.instance_id.clone(),
            item.condition.to_string(),
            item.text.clone(),
            item.pronoun.clone(),
            item.candidate_a.clone(),
            item.candidate_b.clone(),
            item.is_gold_check.to_string(),
        ])?;
    }
    let tasks_csv = String::from_utf8(w.into_inner()?)?;
    let tasks_path = out_dir.join("tasks.csv");
    write_atomic(&tasks_path, tasks_csv.as_bytes())?;
    println!(
        "wrote {} ({} items, {} batches)",
        tasks_path.display(),
        plan.items.len(),
        plan.n_batches
    );
    if let Some(short) = plan.short_batch {
        println!("note: batch {short} is short of {batch_size} items");
    }

    let key = answer_key(&plan, &instances)?;
    let key_path = out_dir.join("answer_key.csv");
    write_atomic(&key_path, emit_answer_key(&key).as_bytes())?;
    println!("wrote {}", key_path.display());
    Ok(())
}

fn cmd_ingest(results: &Path, output: &OutputArgs) -> Result<()> {
    let file =
        std::fs::File::open(results).with_context(|| format!("reading {}", results.display()))?;
    let records = ingest_results(file)?;
    println!("{} valid annotation records", records.len());
    emit_reports(output, "records", None, &records, None)
}

fn cmd_code_papers(codings: Option<&Path>, output: &OutputArgs) -> Result<()> {
    let text = match codings {
        Some(path) => read(path)?,
        None => DEFAULT_CODINGS_CSV.to_string(),
    };
    let records = load_codings(text.as_bytes())?;
    let all = tabulate(&records, |_| true)?;
    let coref = tabulate(&records, |r| r.is_yes(Question::Coref))?;

    let table_questions = [
        Question::LG,
        Question::SG,
        Question::LGneqSG,
        Question::SGBinary,
        Question::SGImmutable,
        Question::TheyNeo,
    ];
    let mut csv_text =
        String::from("question,all_percent,all_denominator,coref_percent,coref_denominator\n");
    println!("{:<16} {:>20} {:>20}", "", "All Papers", "Coref Papers");
    for q in table_questions {
        let (a, c) = (all.stat(q), coref.stat(q));
        println!(
            "{:<16} {:>12.1}% of {:<4} {:>12.1}% of {:<4}",
            q.label(),
            a.percent().unwrap_or(f64::NAN),
            a.denominator,
            c.percent().unwrap_or(f64::NAN),
            c.denominator
        );
        csv_text.push_str(&format!(
            "{},{:.1},{},{:.1},{}\n",
            q.label(),
            a.percent().unwrap_or(f64::NAN),
            a.denominator,
            c.percent().unwrap_or(f64::NAN),
            c.denominator
        ));
    }

    let mut sig_csv = String::from("question,statistic,p_value,significant_at_0.05\n");
    for q in table_questions {
        let result = compare_groups(&records, q, |_| true, |r| r.is_yes(Question::Coref))?;
        sig_csv.push_str(&format!(
            "{},{:.6},{:.6},{}\n",
            q.label(),
            result.statistic,
            result.p_value,
            result.significant_at(0.05)
        ));
    }

    #[derive(serde::Serialize)]
    struct CodePapersReport {
        all: incoref::coding::CodingTable,
        coref: incoref::coding::CodingTable,
    }
    emit_reports(output, "paper_codings", Some(csv_text), &CodePapersReport { all, coref }, None)?;
    if output.format.contains(&Format::Csv) {
        let path = output.out_dir.join("paper_codings_significance.csv");
        write_atomic(&path, sig_csv.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_report(results: &Path, gold: &Path, output: &OutputArgs) -> Result<()> {
    let file =
        std::fs::File::open(results).with_context(|| format!("reading {}", results.display()))?;
    let records = ingest_results(file)?;
    let instances = parse_map(&read(gold)?)?;
    let reports = per_condition_report(&records, &instances)?;

    let mut csv_text = String::from(
        "condition,n_scored,n_correct,accuracy,interval_low,interval_high,definitely,probably,unsure\n",
    );
    let mut rows = Vec::new();
    for r in &reports {
        let frac = |c: incoref::Certainty| r.certainty.fractions.get(&c).copied().unwrap_or(0.0);
        println!(
            "{:<22} accuracy {:.4} [{:.4}, {:.4}] (n={})",
            r.condition.to_string(),
            r.accuracy.accuracy,
            r.accuracy.interval_low,
            r.accuracy.interval_high,
            r.accuracy.n_scored
        );
        csv_text.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.condition,
            r.accuracy.n_scored,
            r.accuracy.n_correct,
            r.accuracy.accuracy,
            r.accuracy.interval_low,
            r.accuracy.interval_high,
            frac(incoref::Certainty::Definitely),
            frac(incoref::Certainty::Probably),
            frac(incoref::Certainty::Unsure),
        ));
        rows.push(BarRow {
            label: r.condition.to_string(),
            value: r.accuracy.accuracy,
            low: Some(r.accuracy.interval_low),
            high: Some(r.accuracy.interval_high),
        });
    }
    let chart = svg_bar_chart("accuracy by condition", &rows);
    emit_reports(output, "condition_report", Some(csv_text), &reports, Some(chart))
}
