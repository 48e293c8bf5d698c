use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use seqdiff_core::synth::{uniform_corpus, PlantedMotif};
use seqdiff_core::{write_corpus, Format, GroupedCorpus};
use serde_json::Value;
use tempfile::TempDir;

fn seqdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqdiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_input(dir: &Path, name: &str, corpus: &GroupedCorpus, format: Format) -> PathBuf {
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_corpus(corpus, format, &mut buf).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn small_corpus(dir: &Path) -> PathBuf {
    let path = dir.join("small.tsv");
    fs::write(
        &path,
        "# group\tid\tevents\n\
         A\ta1\tp p p q r r s t p q\n\
         A\ta2\tp q r s t p q r s t\n\
         A\ta3\tp q\n\
         B\tb1\tx x y z z y x w v w\n\
         B\tb2\tx y z w v x y z w v\n",
    )
    .unwrap();
    path
}

#[test]
fn inspect_reports_groups_and_preprocessing() {
    let tmp = TempDir::new().unwrap();
    let input = small_corpus(tmp.path());
    let out = tmp.path().join("out");
    let run = seqdiff(&["inspect", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["sequences"], 5);
    assert_eq!(summary["groups"][0]["group"], "A");
    assert_eq!(summary["groups"][0]["count"], 3);
    assert_eq!(summary["groups"][1]["count"], 2);
    assert_eq!(summary["config"]["command"], "inspect");
    assert!(out.join("run_config.json").exists());

    let run = seqdiff(&[
        "inspect",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--collapse",
        "--min-length",
        "5",
    ]);
    assert!(run.status.success());
    let summary = json(&out.join("summary.json"));
    // a1 collapses to 7 events, b1 to 8; a3 (2 events) is dropped
    assert_eq!(summary["sequences"], 4);
    assert_eq!(summary["groups"][0]["count"], 2);
    assert_eq!(summary["groups"][0]["length"]["min"], 7);
    assert_eq!(summary["groups"][1]["length"]["min"], 8);
    assert_eq!(summary["config"]["collapse"], true);
}

#[test]
fn unreadable_and_malformed_inputs_fail_with_data_error() {
    let tmp = TempDir::new().unwrap();
    let run = seqdiff(&["inspect", "--input", "/nonexistent/corpus.tsv", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("/nonexistent/corpus.tsv"));

    let bad = tmp.path().join("bad.tsv");
    fs::write(&bad, "A\ts1\ta b\nA\ts2\n").unwrap();
    let run = seqdiff(&["inspect", "--input", bad.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("line 2"));
}

#[test]
fn usage_errors_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    let input = small_corpus(tmp.path());
    let out = tmp.path().to_str().unwrap();
    assert_eq!(seqdiff(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(seqdiff(&["profile", "--input", input.to_str().unwrap(), "--w", "0", "--out", out]).status.code(), Some(1));
    assert_eq!(
        seqdiff(&["silhouette", "--input", input.to_str().unwrap(), "--mode", "fancy", "--out", out]).status.code(),
        Some(1)
    );
    assert_eq!(seqdiff(&["classify", "--input", input.to_str().unwrap(), "--folds", "1", "--out", out]).status.code(), Some(1));
    assert_eq!(seqdiff(&["--help"]).status.code(), Some(0));
}

#[test]
fn silhouette_sweep_shapes() {
    let tmp = TempDir::new().unwrap();
    let corpus = PlantedMotif { per_group: 12, min_len: 30, max_len: 50, ..Default::default() }.generate(3);
    let input = write_input(tmp.path(), "c.jsonl", &corpus, Format::Jsonl);
    let out = tmp.path().join("out");
    let base = ["--input", input.to_str().unwrap(), "--format", "jsonl", "--out", out.to_str().unwrap()];

    let run = seqdiff(&[&["silhouette"][..], &base].concat());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(out.join("silhouette_sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("w,vector_length,mode,score"));
    assert_eq!(csv.lines().count(), 1 + 24);
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.lines().last().unwrap().starts_with("best: w="));

    let run = seqdiff(&[&["silhouette"][..], &base, &["--w", "2", "--vector-length", "50", "--mode", "tf_isf"]].concat());
    assert!(run.status.success());
    let csv = fs::read_to_string(out.join("silhouette_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("2,50,tf_isf,"));
}

#[test]
fn silhouette_needs_two_groups() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("one.tsv");
    fs::write(&input, "A\ts1\ta b c\nA\ts2\tb c a\n").unwrap();
    let run = seqdiff(&["silhouette", "--input", input.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));

    let four = uniform_corpus(&["fight", "explore", "mine", "build"], 4, 20, 5, 1);
    let input = write_input(tmp.path(), "four.tsv", &four, Format::Tsv);
    let out = tmp.path().to_str().unwrap();
    let run = seqdiff(&["silhouette", "--input", input.to_str().unwrap(), "--out", out]);
    assert_eq!(run.status.code(), Some(2));
    let run = seqdiff(&["silhouette", "--input", input.to_str().unwrap(), "--out", out, "--groups", "mine,build", "--w", "2"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn profile_outputs_and_skips() {
    let tmp = TempDir::new().unwrap();
    let input = small_corpus(tmp.path());
    let out = tmp.path().join("out");
    let run = seqdiff(&[
        "profile",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--w",
        "3",
        "--aggregate-cutoff",
        "4",
        "--distance-matrix",
        "a2",
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let profiles = fs::read_to_string(out.join("profiles.csv")).unwrap();
    assert_eq!(profiles.lines().next(), Some("seq_id,position,value"));
    // four sequences of length 10, window 3: 8 positions each
    assert_eq!(profiles.lines().count(), 1 + 4 * 8);
    let aggregate = fs::read_to_string(out.join("aggregate_A.csv")).unwrap();
    assert_eq!(aggregate.lines().count(), 1 + 4);
    let matrix = fs::read_to_string(out.join("distance_matrix.csv")).unwrap();
    assert_eq!(matrix.lines().count(), 8);

    let report = json(&out.join("comparison.json"));
    assert_eq!(report["report"]["skipped"][0]["id"], "a3");
    let metrics = &report["report"]["comparisons"][0]["metrics"];
    let names: Vec<&str> = metrics.as_array().unwrap().iter().map(|m| m["metric"].as_str().unwrap()).collect();
    assert_eq!(names, ["variance", "mean", "minimum", "maximum"]);
    assert!(metrics[0]["test"]["p_value"].is_number());
    assert_eq!(report["config"]["window"], 3);
}

#[test]
fn profile_compares_all_group_pairs() {
    let tmp = TempDir::new().unwrap();
    let four = uniform_corpus(&["fight", "explore", "mine", "build"], 5, 30, 6, 9);
    let input = write_input(tmp.path(), "four.tsv", &four, Format::Tsv);
    let out = tmp.path().join("out");
    let run = seqdiff(&["profile", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap(), "--w", "5"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report = json(&out.join("comparison.json"));
    assert_eq!(report["report"]["groups"].as_array().unwrap().len(), 4);
    assert_eq!(report["report"]["comparisons"].as_array().unwrap().len(), 6);
    for g in ["fight", "explore", "mine", "build"] {
        assert!(out.join(format!("aggregate_{g}.csv")).exists());
    }
}

#[test]
fn profile_fails_when_everything_is_too_short() {
    let tmp = TempDir::new().unwrap();
    let input = small_corpus(tmp.path());
    let run = seqdiff(&["profile", "--input", input.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn classify_emits_both_models_on_shared_folds() {
    let tmp = TempDir::new().unwrap();
    let corpus = PlantedMotif { per_group: 20, min_len: 40, max_len: 60, ..Default::default() }.generate(5);
    let input = write_input(tmp.path(), "c.tsv", &corpus, Format::Tsv);
    let run_with_seed = |seed: &str, out: &Path| {
        let run = seqdiff(&[
            "classify",
            "--input",
            input.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
            "--epochs",
            "100",
        ]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        json(&out.join("classification.json"))
    };
    let first = run_with_seed("1", &tmp.path().join("s1"));
    let models = first["models"].as_array().unwrap();
    assert_eq!(models.len(), 2);
    assert_eq!(models[0]["model"], "tf_isf_logistic");
    assert_eq!(models[1]["model"], "length_logistic");
    for m in models {
        assert_eq!(m["report"]["folds"].as_array().unwrap().len(), 5);
        assert_eq!(m["hyperparameters"]["seed"], 1);
        assert_eq!(m["hyperparameters"]["epochs"], 100);
    }
    // identical per-fold test sizes follow from the shared assignment
    let sizes = |m: &Value| -> Vec<u64> {
        m["report"]["folds"].as_array().unwrap().iter().map(|f| f["test_size"].as_u64().unwrap()).collect()
    };
    assert_eq!(sizes(&models[0]), sizes(&models[1]));

    let second = run_with_seed("2", &tmp.path().join("s2"));
    assert_ne!(first["folds"], second["folds"]);
    let keys = |v: &Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    assert_eq!(keys(&first), keys(&second));
}

#[test]
fn classify_multiclass_reports_macro_metrics() {
    let tmp = TempDir::new().unwrap();
    let four = uniform_corpus(&["fight", "explore", "mine", "build"], 10, 25, 5, 4);
    let input = write_input(tmp.path(), "four.tsv", &four, Format::Tsv);
    let out = tmp.path().join("out");
    let run = seqdiff(&["classify", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap(), "--epochs", "50"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report = json(&out.join("classification.json"));
    for m in report["models"].as_array().unwrap() {
        assert!(m["report"]["positive_class"].is_null());
        assert_eq!(m["report"]["confusion"]["classes"].as_array().unwrap().len(), 4);
        let total: u64 = m["report"]["confusion"]["counts"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|r| r.as_array().unwrap().iter().map(|c| c.as_u64().unwrap()))
            .sum();
        assert_eq!(total, 40);
    }
}
