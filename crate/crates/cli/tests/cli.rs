//! End-to-end checks of the command-line surface: exit codes, file
//! outputs, and determinism across re-runs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use incoref::corpus::map::{parse_map, MAP_HEADER};
use incoref::lexicon::{
    DEFAULT_ADDRESS_TSV, DEFAULT_NOUNS_TSV, DEFAULT_PARADIGMS_TSV,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_incoref"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const EXAMPLE_TEXT: &str = "Mrs. Rebekah Johnson Bobbitt was the younger sister of Lyndon B. Johnson, \
36th President of the United States. Born in 1910 in Stonewall, Texas, she worked in the cataloging \
department of the Library of Congress in the 1930s before her brother entered politics.";

const EXAMPLE_EXPECTED: &str = "M. Booth was the younger sibling of T. Schneider, \
36th President of the United States. Born in 1910 in Stonewall, Texas, they worked in the cataloging \
department of the Library of Congress in the 1930s before their sibling entered politics.";

fn example_map_tsv() -> String {
    let she = EXAMPLE_TEXT.find(" she ").unwrap() + 1;
    let a = EXAMPLE_TEXT.find("Rebekah").unwrap();
    let b = EXAMPLE_TEXT.find("Lyndon").unwrap();
    format!(
        "{}\nfig1\t{EXAMPLE_TEXT}\tshe\t{she}\tRebekah Johnson Bobbitt\t{a}\tTRUE\tLyndon B. Johnson\t{b}\tFALSE\turl\n",
        MAP_HEADER.join("\t")
    )
}

/// Lexicon directory with the pool pinned to the two reference names.
fn pinned_lexicon_dir(root: &Path) -> PathBuf {
    let dir = root.join("lexicon");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("paradigms.tsv"), DEFAULT_PARADIGMS_TSV).unwrap();
    std::fs::write(dir.join("nouns.tsv"), DEFAULT_NOUNS_TSV).unwrap();
    std::fs::write(dir.join("address.tsv"), DEFAULT_ADDRESS_TSV).unwrap();
    std::fs::write(dir.join("names.tsv"), "initial\tlast_name\nM.\tBooth\nT.\tSchneider\n").unwrap();
    dir
}

#[test]
fn ablate_zero_reproduces_the_reference_paragraph() {
    let tmp = tempfile::tempdir().unwrap();
    let lexicon_dir = pinned_lexicon_dir(tmp.path());
    std::fs::write(tmp.path().join("fig1.tsv"), example_map_tsv()).unwrap();

    let out = run(
        &[
            "ablate",
            "--input", "fig1.tsv",
            "--preset", "Zero",
            "--seed", "5",
            "--lexicon-dir", lexicon_dir.to_str().unwrap(),
            "--out-dir", "out",
        ],
        tmp.path(),
    );
    assert_ok(&out);

    let zero = std::fs::read_to_string(tmp.path().join("out/fig1.Zero.tsv")).unwrap();
    let instances = parse_map(&zero).unwrap();
    assert_eq!(instances[0].text(), EXAMPLE_EXPECTED);

    let sidecar = std::fs::read_to_string(tmp.path().join("out/fig1.name_map.json")).unwrap();
    assert!(sidecar.contains("M. Booth") && sidecar.contains("T. Schneider"), "{sidecar}");
}

#[test]
fn ablate_orig_is_a_logical_identity() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("fig1.tsv"), example_map_tsv()).unwrap();
    let out = run(
        &["ablate", "--input", "fig1.tsv", "--preset", "Orig", "--out-dir", "out"],
        tmp.path(),
    );
    assert_ok(&out);
    let orig = std::fs::read_to_string(tmp.path().join("out/fig1.Orig.tsv")).unwrap();
    let instances = parse_map(&orig).unwrap();
    assert_eq!(instances[0].text(), EXAMPLE_TEXT);
}

#[test]
fn rerunning_ablate_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("fig1.tsv"), example_map_tsv()).unwrap();
    let args =
        ["ablate", "--input", "fig1.tsv", "--seed", "11", "--out-dir", "out"];
    assert_ok(&run(&args, tmp.path()));
    let first = std::fs::read(tmp.path().join("out/fig1.Zero.tsv")).unwrap();
    assert_ok(&run(&args, tmp.path()));
    let second = std::fs::read(tmp.path().join("out/fig1.Zero.tsv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn missing_lexicon_dir_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("fig1.tsv"), example_map_tsv()).unwrap();
    let out = run(
        &["ablate", "--input", "fig1.tsv", "--lexicon-dir", "does-not-exist"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bin().arg("--frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn score_map_identity_predictions_are_perfect() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("gold.tsv"), example_map_tsv()).unwrap();
    std::fs::write(
        tmp.path().join("preds.csv"),
        "instance_id,system_id,choice\nfig1,oracle,A\n",
    )
    .unwrap();
    let out = run(
        &["score-map", "--gold", "gold.tsv", "--predictions", "preds.csv", "--out-dir", "out", "--format", "csv,json,svg"],
        tmp.path(),
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(tmp.path().join("out/score_map.csv")).unwrap();
    assert!(csv.contains("oracle,1,1,0,1.000000"), "{csv}");
    assert!(tmp.path().join("out/score_map.svg").exists());
}

#[test]
fn ingest_rejects_malformed_rows_with_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("results.csv"),
        "worker_id,instance_id,condition,choice,certainty,duration_seconds\nw1,i0,Zero,A,sure,\n",
    )
    .unwrap();
    let out = run(&["ingest-results", "--results", "results.csv"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 2"), "{stderr}");
}

#[test]
fn gen_tasks_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("map.tsv"), example_map_tsv()).unwrap();
    let args = [
        "gen-tasks", "--input", "map.tsv", "--conditions", "Orig,Zero,NotPro", "--batch-size", "1",
        "--seed", "7", "--out-dir", "out",
    ];
    assert_ok(&run(&args, tmp.path()));
    let first = std::fs::read(tmp.path().join("out/tasks.csv")).unwrap();
    assert_ok(&run(&args, tmp.path()));
    let second = std::fs::read(tmp.path().join("out/tasks.csv")).unwrap();
    assert_eq!(first, second);
    assert!(tmp.path().join("out/answer_key.csv").exists());
}

#[test]
fn code_papers_emits_the_reference_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["code-papers", "--out-dir", "out"], tmp.path());
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("52.6"), "{stdout}");
    let csv = std::fs::read_to_string(tmp.path().join("out/paper_codings.csv")).unwrap();
    assert!(csv.contains("L.G?,52.6,150,95.4,22"), "{csv}");
    let sig = std::fs::read_to_string(tmp.path().join("out/paper_codings_significance.csv")).unwrap();
    assert_eq!(sig.matches("true").count(), 2, "{sig}");
}

const GOLD_CONLL: &str = "#begin document (demo); part 000\n\
demo 000 0 Dana NNP - - - - - * (0)\n\
demo 000 1 said VBD - - - - - * -\n\
demo 000 2 xey PRP - - - - - * (0)\n\
demo 000 3 left VBD - - - - - * -\n\
\n#end document\n";

const SYS_CONLL: &str = "#begin document (demo); part 000\n\
demo 000 0 Dana NNP - - - - - * (4)\n\
demo 000 1 said VBD - - - - - * -\n\
demo 000 2 xey PRP - - - - - * (4)\n\
demo 000 3 left VBD - - - - - * -\n\
\n#end document\n";

#[test]
fn score_coref_and_recall_flow() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("gold.conll"), GOLD_CONLL).unwrap();
    std::fs::write(tmp.path().join("sys.conll"), SYS_CONLL).unwrap();

    let out = run(
        &["score-coref", "--gold", "gold.conll", "--system", "sys.conll", "--mode", "exclude", "--out-dir", "out"],
        tmp.path(),
    );
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("F1 1.0000"), "{stdout}");

    let out = run(
        &["recall-by-pronoun", "--gold", "gold.conll", "--system", "sys.conll", "--out-dir", "out"],
        tmp.path(),
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(tmp.path().join("out/recall_by_pronoun.csv")).unwrap();
    assert!(csv.contains("neopronoun,1,1,1.000000"), "{csv}");

    let out = run(
        &["iaa", "--annotation-a", "gold.conll", "--annotation-b", "gold.conll", "--out-dir", "out"],
        tmp.path(),
    );
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("1.0000"));
}

#[test]
fn score_coref_worked_partition_example() {
    // gold {{a,b,c},{d,e}} vs system {{a,b},{c,d,e}} over five name
    // mentions: every LEA component is 0.6.
    let tokens = ["Ava", "met", "Ben", "then", "Cal", "and", "Dee", "with", "Eli"];
    let gold_ids = [Some(0), None, Some(0), None, Some(0), None, Some(1), None, Some(1)];
    let sys_ids = [Some(0), None, Some(0), None, Some(1), None, Some(1), None, Some(1)];
    let render = |ids: &[Option<u32>]| {
        let mut s = String::from("#begin document (parts); part 000\n");
        for (i, (tok, id)) in tokens.iter().zip(ids).enumerate() {
            let coref = match id {
                Some(id) => format!("({id})"),
                None => "-".to_string(),
            };
            s.push_str(&format!("parts 000 {i} {tok} NNP - - - - - * {coref}\n"));
        }
        s.push_str("\n#end document\n");
        s
    };
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("gold.conll"), render(&gold_ids)).unwrap();
    std::fs::write(tmp.path().join("sys.conll"), render(&sys_ids)).unwrap();
    let out = run(
        &["score-coref", "--gold", "gold.conll", "--system", "sys.conll", "--out-dir", "out"],
        tmp.path(),
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(tmp.path().join("out/score_coref.csv")).unwrap();
    assert!(csv.contains("0.600000,0.600000,0.600000"), "{csv}");
}

#[test]
fn stats_reports_cue_fractions() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("map.tsv"), example_map_tsv()).unwrap();
    let out = run(&["stats", "--input", "map.tsv", "--out-dir", "out"], tmp.path());
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"frac_with_sem_nouns\": 1.0"), "{stdout}");
    assert!(stdout.contains("\"frac_with_addr_terms\": 1.0"), "{stdout}");
}

#[test]
fn report_joins_results_to_gold() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("gold.tsv"), example_map_tsv()).unwrap();
    std::fs::write(
        tmp.path().join("results.csv"),
        "worker_id,instance_id,condition,choice,certainty,duration_seconds\n\
         w1,fig1,Zero,A,probably,10\n\
         w2,fig1,Zero,B,unsure,12\n",
    )
    .unwrap();
    let out = run(
        &["report", "--results", "results.csv", "--gold", "gold.tsv", "--out-dir", "out", "--format", "csv,svg"],
        tmp.path(),
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(tmp.path().join("out/condition_report.csv")).unwrap();
    assert!(csv.contains("Zero,2,1,0.500000"), "{csv}");
    assert!(tmp.path().join("out/condition_report.svg").exists());
}
