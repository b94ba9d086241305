use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn signet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signet")).current_dir(dir).args(args).output().expect("spawn signet")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = signet(dir, args);
    assert!(out.status.success(), "signet {:?} failed:\n{}", args, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fail(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = signet(dir, args);
    assert!(!out.status.success(), "signet {:?} should fail", args);
    (out.status.code().unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Simulate a small corpus and ingest it into `nets.json`.
fn simulated(networks: &str) -> TempDir {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["simulate", "--networks", networks, "--nodes", "8", "--edges", "14", "--seed", "7", "--out-dir", "sim"]);
    ok(d, &["ingest", "--dialogue", "sim/dialogue.tsv", "--characters", "sim/characters.tsv", "-o", "nets.json"]);
    tmp
}

const CHARACTERS: &str = "film_id\tcharacter_id\tfirst_name\tlast_name\nf1\tw\tWilliam\tWallace\nf1\tx\tXavier\tXu\n";

#[test]
fn simulate_ingest_train_recovers_labels() {
    let tmp = simulated("20");
    let d = tmp.path();
    let stdout = ok(d, &["train", "nets.json", "-o", "model.json", "--truth", "sim/truth.tsv", "--restarts", "2"]);
    assert!(stdout.contains("accuracy"), "{}", stdout);
    let m = json(&d.join("model.json.manifest.json"));
    let acc = m["summary"]["accuracy"]["best_permutation"].as_f64().unwrap();
    assert!(acc >= 0.9, "accuracy {}", acc);
    assert_eq!(m["subcommand"], "train");
    assert_eq!(m["seed"], 0);
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn training_is_byte_identical_across_runs_and_threads() {
    let tmp = simulated("12");
    let d = tmp.path();
    let common = ["train", "nets.json", "--restarts", "2", "--seed", "5", "--beliefs"];
    ok(d, &[&common[..], &["b1.tsv", "--trace", "t1.tsv", "-o", "m1.json", "--threads", "1"]].concat());
    ok(d, &[&common[..], &["b2.tsv", "--trace", "t2.tsv", "-o", "m2.json", "--threads", "4"]].concat());
    for (a, b) in [("m1.json", "m2.json"), ("b1.tsv", "b2.tsv"), ("t1.tsv", "t2.tsv")] {
        assert_eq!(fs::read(d.join(a)).unwrap(), fs::read(d.join(b)).unwrap(), "{} vs {}", a, b);
    }
}

#[test]
fn ablating_triads_writes_zero_triad_weights() {
    let tmp = simulated("6");
    let d = tmp.path();
    ok(d, &["train", "nets.json", "-o", "model.json", "--ablate", "triads", "--restarts", "1"]);
    let m = json(&d.join("model.json"));
    assert_eq!(m["frozen_beta"], true);
    assert_eq!(m["frozen_eta"], false);
    let beta = m["beta"].as_object().unwrap();
    assert_eq!(beta.len(), 4);
    assert!(beta.values().all(|b| b.as_f64() == Some(0.0)), "{:?}", beta);
}

#[test]
fn title_before_name_becomes_one_symbol() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("c.tsv"), CHARACTERS).unwrap();
    fs::write(
        d.join("d.tsv"),
        "film_id\tspeaker_id\taddressee_id\ttext\nf1\tx\tw\tGood morning , Mr. Wallace .\nf1\tx\tw\tMr. Wallace , sit down .\n",
    )
    .unwrap();
    ok(d, &["ingest", "--dialogue", "d.tsv", "--characters", "c.tsv", "-o", "n.json"]);
    let n = json(&d.join("n.json"));
    assert_eq!(n["vocab"], serde_json::json!(["title+name:mr"]));
    let edge = &n["networks"][0]["edges"][0];
    let tokens = edge["fwd"].as_array().unwrap().len() + edge["bwd"].as_array().unwrap().len();
    assert_eq!(tokens, 2);
    let m = json(&d.join("n.json.manifest.json"));
    assert_eq!(m["summary"]["address_spans"], 2);
}

#[test]
fn empty_corpus_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("c.tsv"), CHARACTERS).unwrap();
    fs::write(d.join("d.tsv"), "film_id\tspeaker_id\taddressee_id\ttext\n").unwrap();
    let (code, err) = fail(d, &["ingest", "--dialogue", "d.tsv", "--characters", "c.tsv", "-o", "n.json"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[E_EMPTY]:") && err.contains("no dialogue lines"), "{}", err);
    assert!(!d.join("n.json").exists());
}

#[test]
fn duplicate_character_is_named() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("c.tsv"), format!("{}f1\tw\tWill\tW\n", CHARACTERS)).unwrap();
    fs::write(d.join("d.tsv"), "film_id\tspeaker_id\taddressee_id\ttext\nf1\tx\tw\tHi .\n").unwrap();
    let (_, err) = fail(d, &["ingest", "--dialogue", "d.tsv", "--characters", "c.tsv", "-o", "n.json"]);
    assert!(err.starts_with("error[E_DUPLICATE]:") && err.contains("f1/w"), "{}", err);
}

#[test]
fn usage_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let (code, err) = fail(tmp.path(), &["train", "--bogus"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error[E_USAGE]:"), "{}", err);
    let (code, err) = fail(tmp.path(), &["rank", "missing.json"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error[E_IO]: missing.json"), "{}", err);
}

#[test]
fn rank_prints_requested_rows() {
    let tmp = simulated("6");
    let d = tmp.path();
    ok(d, &["train", "nets.json", "-o", "model.json", "--restarts", "1"]);
    let table = ok(d, &["rank", "model.json", "--top", "10"]);
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "rank\tv\tv_ratio\tt\tt_ratio");
    assert_eq!(rows.len(), 11);
    assert!(table.starts_with("# model_sha256="));
    // no manifest for stdout output unless asked
    let manifests = fs::read_dir(d)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with("manifest.json"))
        .count();
    assert_eq!(manifests, 2);
}

#[test]
fn replay_reproduces_and_detects_changes() {
    let tmp = simulated("6");
    let d = tmp.path();
    ok(d, &["train", "nets.json", "-o", "model.json", "--restarts", "1", "--beliefs", "b.tsv"]);
    let out = ok(d, &["replay", "model.json.manifest.json"]);
    assert!(out.contains("outputs identical"), "{}", out);

    fs::write(d.join("b.tsv"), "tampered").unwrap();
    ok(d, &["replay", "model.json.manifest.json"]);
    assert_ne!(fs::read_to_string(d.join("b.tsv")).unwrap(), "tampered");

    let mut text = fs::read_to_string(d.join("nets.json")).unwrap();
    text.push('\n');
    fs::write(d.join("nets.json"), text).unwrap();
    let (_, err) = fail(d, &["replay", "model.json.manifest.json"]);
    assert!(err.starts_with("error[E_REPLAY]:") && err.contains("nets.json"), "{}", err);
}

#[test]
fn export_writes_parseable_dot() {
    let tmp = simulated("3");
    let d = tmp.path();
    ok(d, &["train", "nets.json", "-o", "model.json", "--restarts", "1"]);
    ok(d, &["export", "model.json", "nets.json", "--out-dir", "ex", "--network", "film1"]);
    let ex = d.join("ex");
    let dot = fs::read_to_string(ex.join("film1.dot")).unwrap();
    assert!(dot.trim_start().starts_with("graph") || dot.starts_with("//"), "{}", dot);
    assert!(dot.trim_end().ends_with('}'));
    assert_eq!(dot.matches(" -- ").count(), 14);
    for f in ["beliefs.tsv", "weights.tsv", "weights_chart.json", "manifest.json"] {
        assert!(ex.join(f).exists(), "{}", f);
    }
    assert!(!ex.join("film0.dot").exists());
    let (_, err) = fail(d, &["export", "model.json", "nets.json", "--out-dir", "ex2", "--network", "nope"]);
    assert!(err.starts_with("error[E_USAGE]:"), "{}", err);
}

#[test]
fn eval_writes_ablation_table() {
    let tmp = simulated("10");
    let d = tmp.path();
    ok(
        d,
        &["eval", "nets.json", "-o", "ab.tsv", "--holdout-frac", "0.3", "--restarts", "1", "--per-network", "per.tsv"],
    );
    let table = fs::read_to_string(d.join("ab.tsv")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4, "{}", table);
    assert!(rows[1].starts_with("full\t"));
    let per = fs::read_to_string(d.join("per.tsv")).unwrap();
    assert_eq!(per.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 3);
    let (code, _) = fail(d, &["eval", "nets.json", "-o", "x.tsv", "--ablate", "triads"]);
    assert_eq!(code, 1);
}

#[test]
fn lexicon_accepts_listed_terms_and_replays() {
    let tmp = simulated("4");
    let d = tmp.path();
    fs::write(d.join("ph.txt"), "# none\n").unwrap();
    ok(
        d,
        &[
            "lexicon",
            "--dialogue",
            "sim/dialogue.tsv",
            "--characters",
            "sim/characters.tsv",
            "--placeholders",
            "ph.txt",
            "--accept",
            "baby",
            "--candidates",
            "cand.tsv",
            "-o",
            "lex.txt",
        ],
    );
    let lex = fs::read_to_string(d.join("lex.txt")).unwrap();
    let terms: Vec<&str> = lex.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).collect();
    assert_eq!(terms.len(), 1, "{}", lex);
    assert!(terms[0].starts_with("baby"));
    ok(d, &["replay", "lex.txt.manifest.json"]);
}
