use std::collections::BTreeSet;
use std::path::Path;

use causeloom_core::digest::json_digest;
use causeloom_core::event_store::{Corpus, Event, EventSequence};
use causeloom_core::hypergraph::{aggregate, DirectedHypergraph, Provenance};
use causeloom_core::layout::communities_louvain;
use causeloom_core::rpp::{CausalEdge, CausalGraph};
use causeloom_core::snapshot::Snapshot;
use causeloom_service::{router, AppState};
use reqwest::StatusCode;
use serde_json::{json, Value};

fn fixture() -> Snapshot {
    let names: Vec<String> = ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect();
    let ev = |entity, time| Event { entity, time };
    let corpus = Corpus::new(
        names.clone(),
        vec![
            EventSequence::new("s1", vec![ev(0, 0.5), ev(1, 1.0), ev(2, 2.5), ev(3, 2.7)], 4.0),
            EventSequence::new("s2", vec![ev(0, 0.1), ev(0, 3.9), ev(1, 0.3), ev(4, 1.2)], 5.0),
        ],
    )
    .unwrap();
    let edge = |cause, effect, strength| CausalEdge { cause, effect, strength };
    let graph = CausalGraph::new(
        5,
        vec![edge(0, 1, 0.9), edge(1, 2, 0.9), edge(0, 2, 0.5), edge(2, 3, -0.4)],
        0.1,
    );
    let mut hg = DirectedHypergraph::from_causal_graph(&graph, names).unwrap();
    let combined = Provenance { size_level: 2, recruited: false };
    hg.insert(vec![1, 3], 0, 0.6, combined).unwrap();
    hg.insert(vec![1, 4], 0, -0.3, combined).unwrap();
    let partition = communities_louvain(&graph, 0);
    Snapshot {
        corpus_digest: json_digest(&corpus),
        corpus,
        graph,
        hypergraph: hg,
        embeddings_digest: "none".into(),
        partition,
        config: json!({"seed": 0}),
        created_at: "2024-01-01T00:00:00Z".into(),
    }
}

fn write_fixture(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("snapshot.json");
    std::fs::write(&path, fixture().to_json_string()).unwrap();
    path
}

async fn spawn(state: AppState) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(state)).await.unwrap() });
    format!("http://{addr}")
}

async fn get(base: &str, path: &str) -> (StatusCode, String) {
    let r = reqwest::get(format!("{base}{path}")).await.unwrap();
    (r.status(), r.text().await.unwrap())
}

async fn get_json(base: &str, path: &str) -> (StatusCode, Value) {
    let (s, body) = get(base, path).await;
    (s, serde_json::from_str(&body).unwrap())
}

async fn post(client: &reqwest::Client, base: &str, body: Value) -> (StatusCode, Value) {
    let r = client.post(format!("{base}/api/amendments")).json(&body).send().await.unwrap();
    (r.status(), r.json().await.unwrap())
}

fn edge_id(causes: &[&str], effect: &str) -> String {
    causeloom_core::hypergraph::edge_id(causes, effect)
}

fn member_ids(graph: &Value) -> BTreeSet<String> {
    graph["groups"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|g| g["members"].as_array().unwrap().iter())
        .map(|m| m["id"].as_str().unwrap().to_string())
        .collect()
}

#[tokio::test(flavor = "multi_thread")]
async fn without_snapshot_data_endpoints_conflict() {
    let base = spawn(AppState::empty(3)).await;
    let (s, body) = get_json(&base, "/api/health").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["snapshot"], Value::Null);
    for path in [
        "/api/graph",
        "/api/propagation?source=a&target=b",
        "/api/histogram?entity=a",
        "/api/communities",
        "/api/orderings",
    ] {
        let (s, body) = get_json(&base, path).await;
        assert_eq!(s, StatusCode::CONFLICT, "{path}");
        assert_eq!(body["error"], "no_snapshot");
        assert!(body["detail"].is_string());
    }
    let client = reqwest::Client::new();
    let (s, _) = post(&client, &base, json!({"edge_id": "x", "action": "delete"})).await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test(flavor = "multi_thread")]
async fn graph_filters_and_orders() {
    let dir = tempfile::tempdir().unwrap();
    let base = spawn(AppState::load(&write_fixture(dir.path()), None, 3).unwrap()).await;
    let (s, text) = get(&base, "/api/graph").await;
    assert_eq!(s, StatusCode::OK);
    let body: Value = serde_json::from_str(&text).unwrap();
    // key-sorted output: re-serializing through a sorted map is a no-op
    assert_eq!(body.to_string(), text);
    let groups = aggregate(&fixture().hypergraph);
    assert_eq!(body["groups"].as_array().unwrap().len(), groups.len());
    assert_eq!(body["entities"].as_array().unwrap().len(), 5);
    assert_eq!(member_ids(&body).len(), fixture().hypergraph.len());

    let (_, body) = get_json(&base, "/api/graph?min_strength=1.1").await;
    assert!(body["groups"].as_array().unwrap().is_empty());

    let (_, body) = get_json(&base, "/api/graph?sign=inhibiting").await;
    for g in body["groups"].as_array().unwrap() {
        for m in g["members"].as_array().unwrap() {
            assert!(m["strength"].as_f64().unwrap() < 0.0);
        }
    }

    let (_, body) = get_json(&base, "/api/graph?columns=strength").await;
    let maxes: Vec<f64> = body["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| {
            g["members"]
                .as_array()
                .unwrap()
                .iter()
                .map(|m| m["strength"].as_f64().unwrap().abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(maxes.windows(2).all(|w| w[0] >= w[1]));

    let (_, body) = get_json(&base, "/api/graph?rows=alphabetical&columns=topology&focus=d").await;
    let first = &body["groups"][0];
    assert!(first["and_core"].as_array().unwrap().contains(&json!(3)) || first["or_set"].as_array().unwrap().contains(&json!(3)));

    let (_, body) = get_json(&base, "/api/graph?rows=manual&row_perm=4,3,2,1,0").await;
    let names: Vec<&str> = body["entities"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["e", "d", "c", "b", "a"]);

    for bad in [
        "/api/graph?rows=spiral",
        "/api/graph?columns=topology",
        "/api/graph?rows=manual&row_perm=0,0,1,2,3",
        "/api/graph?sign=sideways",
        "/api/graph?min_strength=-1",
        "/api/graph?min_strength=abc",
        "/api/graph?colour=red",
    ] {
        let (s, body) = get_json(&base, bad).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{bad}");
        assert_eq!(body["error"], "bad_request");
    }
    let (s, _) = get_json(&base, "/api/graph?columns=topology&focus=zz").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn amendments_validate_and_apply() {
    let dir = tempfile::tempdir().unwrap();
    let base = spawn(AppState::load(&write_fixture(dir.path()), None, 3).unwrap()).await;
    let client = reqwest::Client::new();
    let ab = edge_id(&["a"], "b");
    let bc = edge_id(&["b"], "c");

    let (s, body) = post(&client, &base, json!({"edge_id": ab, "action": "flip_sign", "author": "t"})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["seq"], 1);
    let (_, body) = post(&client, &base, json!({"edge_id": bc, "action": "set_strength", "value": 0.7})).await;
    assert_eq!(body["seq"], 2);

    for bad in [
        json!({"edge_id": ab, "action": "set_strength", "value": 1.5}),
        json!({"edge_id": ab, "action": "set_strength", "value": 0.0}),
        json!({"edge_id": ab, "action": "set_strength"}),
        json!({"edge_id": ab, "action": "explode"}),
        json!({"edge_id": ab, "action": "delete", "value": 0.3}),
        json!({"action": "delete"}),
    ] {
        let (s, body) = post(&client, &base, bad.clone()).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{bad}");
        assert_eq!(body["error"], "bad_request");
    }
    let r = client
        .post(format!("{base}/api/amendments"))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    let (s, body) = post(&client, &base, json!({"edge_id": "nope", "action": "delete"})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "not_found");

    let (_, graph) = get_json(&base, "/api/graph").await;
    assert_eq!(graph["journal_len"], 2);
    let strength_of = |g: &Value, id: &str| {
        g["groups"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|g| g["members"].as_array().unwrap().iter())
            .find(|m| m["id"] == id)
            .map(|m| m["strength"].as_f64().unwrap())
    };
    assert_eq!(strength_of(&graph, &ab), Some(-0.9));
    assert_eq!(strength_of(&graph, &bc), Some(0.7));

    let (_, body) = post(&client, &base, json!({"edge_id": ab, "action": "delete"})).await;
    assert_eq!(body["seq"], 3);
    let (_, graph) = get_json(&base, "/api/graph").await;
    assert!(!member_ids(&graph).contains(&ab));
    // a deleted edge is no longer a valid target
    let (s, _) = post(&client, &base, json!({"edge_id": ab, "action": "flip_sign"})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (_, health) = get_json(&base, "/api/health").await;
    assert_eq!(health["journal_len"], 3);
}

#[tokio::test(flavor = "multi_thread")]
async fn concurrent_posts_get_dense_unique_seqs() {
    let dir = tempfile::tempdir().unwrap();
    let snap = write_fixture(dir.path());
    let base = spawn(AppState::load(&snap, None, 3).unwrap()).await;
    let client = reqwest::Client::new();
    let ids: Vec<String> = fixture().hypergraph.edges.iter().map(|e| e.id.clone()).collect();
    let tasks: Vec<_> = (0..100)
        .map(|i| {
            let client = client.clone();
            let base = base.clone();
            let id = ids[i % ids.len()].clone();
            tokio::spawn(async move { post(&client, &base, json!({"edge_id": id, "action": "flip_sign"})).await })
        })
        .collect();
    let mut seqs = Vec::new();
    for t in tasks {
        let (s, body) = t.await.unwrap();
        assert_eq!(s, StatusCode::OK);
        seqs.push(body["seq"].as_u64().unwrap());
    }
    seqs.sort_unstable();
    assert_eq!(seqs, (1..=100).collect::<Vec<_>>());

    let journal = std::fs::read_to_string(causeloom_service::config::default_journal_path(&snap)).unwrap();
    assert_eq!(journal.lines().count(), 100);
    // flips commute, so the final sign depends only on the per-edge count
    let (_, graph) = get_json(&base, "/api/graph").await;
    assert_eq!(graph["journal_len"], 100);
    let mut counts = vec![0usize; ids.len()];
    for i in 0..100 {
        counts[i % ids.len()] += 1;
    }
    for (id, n) in ids.iter().zip(counts) {
        let original = fixture().hypergraph.edge(id).unwrap().strength;
        let expected = if n % 2 == 0 { original } else { -original };
        let got = graph["groups"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|g| g["members"].as_array().unwrap().iter())
            .find(|m| m["id"] == id.as_str())
            .unwrap()["strength"]
            .as_f64()
            .unwrap();
        assert_eq!(got, expected);
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn restart_replays_to_identical_responses() {
    let dir = tempfile::tempdir().unwrap();
    let snap = write_fixture(dir.path());
    let queries = [
        "/api/graph",
        "/api/graph?columns=strength&rows=groups",
        "/api/graph?min_strength=0.5&sign=impelling",
        "/api/propagation?source=a&target=c",
        "/api/orderings?columns=degree",
    ];
    let before = {
        let base = spawn(AppState::load(&snap, None, 3).unwrap()).await;
        let client = reqwest::Client::new();
        post(&client, &base, json!({"edge_id": edge_id(&["a"], "b"), "action": "set_strength", "value": -0.25})).await;
        post(&client, &base, json!({"edge_id": edge_id(&["c"], "d"), "action": "delete"})).await;
        post(&client, &base, json!({"edge_id": edge_id(&["b", "d"], "a"), "action": "flip_sign"})).await;
        let mut out = Vec::new();
        for q in queries {
            out.push(get(&base, q).await.1);
        }
        out
    };
    let base = spawn(AppState::load(&snap, None, 3).unwrap()).await;
    for (q, old) in queries.iter().zip(before) {
        assert_eq!(get(&base, q).await.1, old, "{q}");
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn propagation_histogram_communities() {
    let dir = tempfile::tempdir().unwrap();
    let base = spawn(AppState::load(&write_fixture(dir.path()), None, 3).unwrap()).await;

    let (s, p) = get_json(&base, "/api/propagation?source=a&target=c").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(p["reachable"], true);
    assert_eq!(p["nodes"], json!(["a", "b", "c"]));
    assert!((p["distance"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert_eq!(p["layers"][0], json!(["a"]));
    assert!(p["alternatives"].as_array().unwrap().len() >= 2);

    let (_, p) = get_json(&base, "/api/propagation?source=b&target=b").await;
    assert_eq!(p["nodes"], json!(["b"]));
    assert_eq!(p["distance"], 0.0);

    // the combined cause {b,d} -> a puts a pseudo-node on the path
    let (_, p) = get_json(&base, "/api/propagation?source=d&target=b").await;
    assert_eq!(p["nodes"], json!(["d", "b&d", "a", "b"]));

    let (s, p) = get_json(&base, "/api/propagation?source=c&target=e").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(p["reachable"], false);
    assert!(p.get("nodes").is_none());

    let (s, _) = get_json(&base, "/api/propagation?source=a&target=zz").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = get_json(&base, "/api/propagation?source=a").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, h) = get_json(&base, "/api/histogram?entity=a&bin=0.5").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(h["total"], 3);
    assert_eq!(h["counts"].as_array().unwrap().len(), 10);
    let (s, _) = get_json(&base, "/api/histogram?entity=a&bin=0").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = get_json(&base, "/api/histogram?entity=q").await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (_, c) = get_json(&base, "/api/communities").await;
    assert_eq!(c["community"].as_array().unwrap().len(), 5);
    let total: u64 = c["communities"].as_array().unwrap().iter().map(|g| g["size"].as_u64().unwrap()).sum();
    assert_eq!(total, 5);

    let (_, o) = get_json(&base, "/api/orderings?rows=alphabetical&columns=degree").await;
    assert_eq!(o["rows"]["strategy"], "alphabetical");
    assert_eq!(o["rows"]["permutation"], json!([0, 1, 2, 3, 4]));
    assert_eq!(o["columns"]["permutation"].as_array().unwrap().len(), o["group_count"].as_u64().unwrap() as usize);
}
