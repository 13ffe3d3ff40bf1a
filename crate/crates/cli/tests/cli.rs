use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use causeloom_core::hypergraph::{DirectedHypergraph, HyperedgeRecord};
use causeloom_core::rpp::CausalGraph;
use causeloom_core::snapshot::Snapshot;
use serde_json::Value;

fn causeloom(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causeloom"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = causeloom(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// simulate, ingest, embed and fit on a small corpus.
fn prepared() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--entities", "4", "--plant", "b,c->H", "--sequences", "4", "--horizon", "30", "--seed", "3", "--out", "raw.jsonl"]);
    ok(d, &["ingest", "raw.jsonl", "--out", "corpus.json"]);
    ok(d, &["embed", "--corpus", "corpus.json", "--out", "emb.json", "--seed", "3"]);
    ok(d, &["fit", "--corpus", "corpus.json", "--out", "params.json", "--seed", "3", "--mc-samples", "100", "--max-iterations", "30"]);
    dir
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn fit_is_deterministic_per_seed() {
    let dir = prepared();
    let d = dir.path();
    ok(d, &["fit", "--corpus", "corpus.json", "--out", "again.json", "--seed", "3", "--mc-samples", "100", "--max-iterations", "30"]);
    assert_eq!(read(d.join("params.json")), read(d.join("again.json")));
    ok(d, &["fit", "--corpus", "corpus.json", "--out", "other.json", "--seed", "4", "--mc-samples", "100", "--max-iterations", "30"]);
    assert_ne!(read(d.join("params.json")), read(d.join("other.json")));
}

#[test]
fn max_size_one_reproduces_the_individual_graph() {
    let dir = prepared();
    let d = dir.path();
    ok(d, &["combine", "--corpus", "corpus.json", "--params", "params.json", "--embeddings", "emb.json", "--out", "hg.json", "--max-size", "1"]);
    let hg: Value = serde_json::from_str(&read(d.join("hg.json"))).unwrap();
    let params: Value = serde_json::from_str(&read(d.join("params.json"))).unwrap();
    let entities: Vec<String> = serde_json::from_value(hg["payload"]["entities"].clone()).unwrap();
    let records: Vec<HyperedgeRecord> = serde_json::from_value(hg["payload"]["hyperedges"].clone()).unwrap();
    let graph: CausalGraph = serde_json::from_value(params["payload"]["graph"].clone()).unwrap();
    let got = DirectedHypergraph::from_records(entities.clone(), &records).unwrap();
    assert_eq!(got, DirectedHypergraph::from_causal_graph(&graph, entities).unwrap());
    assert!(hg["payload"]["levels"].as_array().unwrap().is_empty());
}

#[test]
fn rerunning_a_stage_is_a_no_op() {
    let dir = prepared();
    let d = dir.path();
    let combine = ["combine", "--corpus", "corpus.json", "--params", "params.json", "--embeddings", "emb.json", "--out", "hg.json", "--tie-window", "0.05"];
    ok(d, &combine);
    let export = ["export", "--corpus", "corpus.json", "--params", "params.json", "--embeddings", "emb.json", "--hypergraph", "hg.json", "--out", "snap.json"];
    ok(d, &export);
    let stamp = |name: &str| std::fs::metadata(d.join(name)).unwrap().modified().unwrap();
    let before: Vec<_> = ["corpus.json", "emb.json", "params.json", "hg.json", "snap.json"].iter().map(|n| stamp(n)).collect();

    assert!(ok(d, &["ingest", "raw.jsonl", "--out", "corpus.json"]).contains("up to date"));
    assert!(ok(d, &["embed", "--corpus", "corpus.json", "--out", "emb.json", "--seed", "3"]).contains("up to date"));
    assert!(ok(d, &["fit", "--corpus", "corpus.json", "--out", "params.json", "--seed", "3", "--mc-samples", "100", "--max-iterations", "30"]).contains("up to date"));
    assert!(ok(d, &combine).contains("up to date"));
    assert!(ok(d, &export).contains("up to date"));
    let after: Vec<_> = ["corpus.json", "emb.json", "params.json", "hg.json", "snap.json"].iter().map(|n| stamp(n)).collect();
    assert_eq!(before, after);

    // a changed config reruns the stage
    assert!(!ok(d, &["embed", "--corpus", "corpus.json", "--out", "emb.json", "--seed", "4"]).contains("up to date"));
    // and downstream stages notice their input changed
    assert!(!ok(d, &combine).contains("up to date"));

    let snap = Snapshot::load(&d.join("snap.json")).unwrap();
    assert_eq!(snap.entities(), ["b", "c", "H", "x1"]);
}

#[test]
fn exit_codes_separate_validation_from_runtime() {
    let dir = prepared();
    let d = dir.path();
    let code = |args: &[&str]| causeloom(d, args).status.code().unwrap();
    assert_eq!(code(&["fit", "--corpus", "missing.json", "--out", "p.json"]), 2);
    assert_eq!(code(&["fit", "--corpus", "corpus.json", "--out", "p.json", "--smoothing", "-1"]), 2);
    assert_eq!(code(&["combine", "--corpus", "corpus.json", "--params", "emb.json", "--embeddings", "emb.json", "--out", "x.json"]), 2);
    assert_eq!(code(&["simulate", "--plant", "b,c", "--out", "x.jsonl"]), 2);
    assert_eq!(code(&["simulate", "--entities", "2", "--plant", "b,c->H", "--out", "x.jsonl"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);

    std::fs::write(d.join("bad.toml"), "[fit]\nbetta = 1\n").unwrap();
    let out = causeloom(d, &["--config", "bad.toml", "fit", "--corpus", "corpus.json", "--out", "p.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fit.betta"));

    std::fs::write(d.join("bad.jsonl"), "{\"seq\":\"s\",\"entity\":\"a\",\"t\":-1}\n").unwrap();
    let out = causeloom(d, &["ingest", "bad.jsonl", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    assert_eq!(code(&["embed", "--corpus", "corpus.json", "--out", "no/such/dir/e.json"]), 3);
}

#[test]
fn config_file_feeds_flags_override() {
    let dir = prepared();
    let d = dir.path();
    std::fs::write(d.join("c.toml"), "[fit]\nmax_iterations = 2\nmc_samples = 50\nseed = 9\n").unwrap();
    ok(d, &["--config", "c.toml", "fit", "--corpus", "corpus.json", "--out", "p1.json", "--seed", "3"]);
    let p: Value = serde_json::from_str(&read(d.join("p1.json"))).unwrap();
    assert_eq!(p["config"]["max_iterations"], 2);
    assert_eq!(p["config"]["mc_samples"], 50);
    assert_eq!(p["config"]["seed"], 3);
    assert!(p["payload"]["report"]["iterations"].as_u64().unwrap() <= 2);
}
