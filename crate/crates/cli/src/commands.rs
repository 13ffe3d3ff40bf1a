use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use causeloom_core::combo::{discover_combined, DiscoveryInput};
use causeloom_core::digest::json_digest;
use causeloom_core::embeddings::{train_embeddings, EmbeddingTable};
use causeloom_core::event_store::{cooccurrence_counts, filter_top_entities, parse_corpus, Corpus, Format};
use causeloom_core::hypergraph::{DirectedHypergraph, HyperedgeRecord};
use causeloom_core::layout::communities_louvain;
use causeloom_core::rpp::{build_causal_graph, fit_with_report, BasisKernels, CausalGraph, ParamsFile};
use causeloom_core::snapshot::Snapshot;
use causeloom_core::synth::{simulate_planted, SynthManifest};
use causeloom_service::{AppState, ServiceConfig};
use serde_json::{json, Value};

use crate::artifact::{self, digests, is_current, Envelope, Input};
use crate::config::{CliConfig, FitStage, IngestConfig};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(anyhow!("{e}"))
}

fn runtime(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Runtime(e.into())
}

fn up_to_date(stage: &str, out: &Path) {
    println!("{stage}: {} is up to date", out.display());
}

fn corpus_from(input: &Input) -> Result<Corpus> {
    let env = input.envelope("corpus")?;
    let corpus: Corpus = serde_json::from_value(env.payload).map_err(invalid)?;
    corpus.validate().map_err(invalid)?;
    Ok(corpus)
}

pub fn ingest(cfg: &IngestConfig, source: &Path, out: &Path, force: bool) -> Result<()> {
    let format: Format = match &cfg.format {
        Some(f) => f.parse().map_err(invalid)?,
        None if source.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
        None => Format::Jsonl,
    };
    if cfg.top_k == Some(0) {
        return Err(invalid("ingest.top_k: must be at least 1"));
    }
    let input = Input::read("source", source)?;
    let config = json!({"format": format, "top_k": cfg.top_k});
    let inputs = digests(&[&input]);
    if !force && is_current(out, "corpus", &config, &inputs) {
        up_to_date("ingest", out);
        return Ok(());
    }
    let mut corpus = parse_corpus(input.text.as_bytes(), format)
        .with_context(|| format!("cannot parse {}", source.display()))
        .map_err(CliError::Validation)?;
    if let Some(k) = cfg.top_k {
        corpus = filter_top_entities(&corpus, k).map_err(invalid)?;
    }
    let env = Envelope {
        artifact: "corpus".into(),
        config,
        inputs,
        payload: serde_json::to_value(&corpus).map_err(runtime)?,
    };
    artifact::write(out, &env).map_err(CliError::Runtime)?;
    println!(
        "ingest: wrote {} ({} entities, {} sequences, {} events)",
        out.display(),
        corpus.num_entities(),
        corpus.num_sequences(),
        corpus.num_events()
    );
    Ok(())
}

pub fn embed(cfg: &CliConfig, corpus_path: &Path, out: &Path, force: bool) -> Result<()> {
    cfg.embed.validate().map_err(|e| invalid(format!("embed: {e}")))?;
    let input = Input::read("corpus", corpus_path)?;
    let config = serde_json::to_value(&cfg.embed).map_err(runtime)?;
    let inputs = digests(&[&input]);
    if !force && is_current(out, "embeddings", &config, &inputs) {
        up_to_date("embed", out);
        return Ok(());
    }
    let corpus = corpus_from(&input)?;
    let table = train_embeddings(&corpus, &cfg.embed).map_err(invalid)?;
    let env = Envelope {
        artifact: "embeddings".into(),
        config,
        inputs,
        payload: table.to_json(),
    };
    artifact::write(out, &env).map_err(CliError::Runtime)?;
    println!("embed: wrote {} ({} vectors of dimension {})", out.display(), table.len(), table.dimension());
    Ok(())
}

fn check_fit(stage: &FitStage) -> Result<()> {
    if stage.basis == 0 {
        return Err(invalid("fit.basis: must be at least 1"));
    }
    stage.solver.validate().map_err(|e| invalid(format!("fit: {e}")))
}

pub fn fit(cfg: &CliConfig, corpus_path: &Path, out: &Path, force: bool) -> Result<()> {
    check_fit(&cfg.fit)?;
    let input = Input::read("corpus", corpus_path)?;
    let config = serde_json::to_value(&cfg.fit).map_err(runtime)?;
    let inputs = digests(&[&input]);
    if !force && is_current(out, "params", &config, &inputs) {
        up_to_date("fit", out);
        return Ok(());
    }
    let corpus = corpus_from(&input)?;
    let kernels = BasisKernels::<f64>::for_corpus(&corpus, cfg.fit.basis).map_err(invalid)?;
    let outcome = fit_with_report(&corpus, &kernels, &cfg.fit.solver, None).map_err(runtime)?;
    let graph = build_causal_graph(&outcome.params, cfg.fit.solver.strength_threshold, cfg.fit.solver.sign_tolerance)
        .map_err(runtime)?;
    let env = Envelope {
        artifact: "params".into(),
        config,
        inputs,
        payload: json!({
            "params": outcome.params.to_file(&kernels),
            "graph": graph,
            "report": {
                "iterations": outcome.iterations,
                "converged": outcome.converged,
                "objective_history": outcome.objective_history,
            },
        }),
    };
    artifact::write(out, &env).map_err(CliError::Runtime)?;
    println!(
        "fit: wrote {} ({} iterations, converged: {}, {} causal edges)",
        out.display(),
        outcome.iterations,
        outcome.converged,
        graph.edges.len()
    );
    Ok(())
}

struct Fitted {
    stage: FitStage,
    params: ParamsFile<f64>,
    graph: CausalGraph,
}

fn fitted_from(input: &Input) -> Result<Fitted> {
    let env = input.envelope("params")?;
    let stage: FitStage = serde_json::from_value(env.config).map_err(invalid)?;
    let params = serde_json::from_value(env.payload["params"].clone()).map_err(invalid)?;
    let graph = serde_json::from_value(env.payload["graph"].clone()).map_err(invalid)?;
    Ok(Fitted { stage, params, graph })
}

fn embeddings_from(input: &Input, corpus: &Corpus) -> Result<EmbeddingTable> {
    let env = input.envelope("embeddings")?;
    EmbeddingTable::from_json(&env.payload, &corpus.names()).map_err(invalid)
}

pub struct CombinePaths<'a> {
    pub corpus: &'a Path,
    pub params: &'a Path,
    pub embeddings: &'a Path,
    pub out: &'a Path,
}

pub fn combine(cfg: &CliConfig, paths: &CombinePaths<'_>, force: bool) -> Result<()> {
    let rules = &cfg.combine;
    rules.validate().map_err(|e| invalid(format!("combine: {e}")))?;
    let corpus_in = Input::read("corpus", paths.corpus)?;
    let params_in = Input::read("params", paths.params)?;
    let emb_in = Input::read("embeddings", paths.embeddings)?;
    let config = serde_json::to_value(rules).map_err(runtime)?;
    let inputs = digests(&[&corpus_in, &params_in, &emb_in]);
    if !force && is_current(paths.out, "hypergraph", &config, &inputs) {
        up_to_date("combine", paths.out);
        return Ok(());
    }
    let corpus = corpus_from(&corpus_in)?;
    let fitted = fitted_from(&params_in)?;
    let embeddings = embeddings_from(&emb_in, &corpus)?;
    let (params, kernels) = fitted.params.into_parts().map_err(invalid)?;
    if params.num_entities() != corpus.num_entities() {
        return Err(invalid("params and corpus disagree on the number of entities"));
    }
    let cooccurrence = cooccurrence_counts(&corpus, rules.tie_window).map_err(invalid)?;
    let input = DiscoveryInput {
        corpus: &corpus,
        base_graph: &fitted.graph,
        base_params: &params,
        kernels: &kernels,
        embeddings: &embeddings,
        cooccurrence: &cooccurrence,
        fit: &fitted.stage.solver,
    };
    let report = discover_combined(&input, rules).map_err(runtime)?;
    let names = corpus.names();
    let filtered: Vec<Value> = report
        .filter_set
        .combos
        .iter()
        .map(|c| {
            let members: Vec<&String> = c.members.iter().map(|&m| &names[m]).collect();
            json!({"causes": members, "effect": names[c.effect]})
        })
        .collect();
    let env = Envelope {
        artifact: "hypergraph".into(),
        config,
        inputs,
        payload: json!({
            "entities": names,
            "hyperedges": report.hypergraph.to_records(),
            "levels": report.levels,
            "filter_set": filtered,
        }),
    };
    artifact::write(paths.out, &env).map_err(CliError::Runtime)?;
    let combined = report.hypergraph.edges.iter().filter(|e| e.causes.len() > 1).count();
    println!(
        "combine: wrote {} ({} hyperedges, {} combined)",
        paths.out.display(),
        report.hypergraph.len(),
        combined
    );
    Ok(())
}

pub struct ExportPaths<'a> {
    pub corpus: &'a Path,
    pub params: &'a Path,
    pub embeddings: &'a Path,
    pub hypergraph: &'a Path,
    pub out: &'a Path,
}

/// `SOURCE_DATE_EPOCH` pins the timestamp for reproducible bundles.
fn creation_time() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn export(cfg: &CliConfig, paths: &ExportPaths<'_>, force: bool) -> Result<()> {
    let corpus_in = Input::read("corpus", paths.corpus)?;
    let params_in = Input::read("params", paths.params)?;
    let emb_in = Input::read("embeddings", paths.embeddings)?;
    let hg_in = Input::read("hypergraph", paths.hypergraph)?;
    let config = json!({
        "louvain_seed": cfg.export.louvain_seed,
        "inputs": digests(&[&corpus_in, &params_in, &emb_in, &hg_in]),
    });
    if !force {
        if let Ok(old) = Snapshot::load(paths.out) {
            if old.config == config {
                up_to_date("export", paths.out);
                return Ok(());
            }
        }
    }
    let corpus = corpus_from(&corpus_in)?;
    let fitted = fitted_from(&params_in)?;
    embeddings_from(&emb_in, &corpus)?;
    let hg_env = hg_in.envelope("hypergraph")?;
    let records: Vec<HyperedgeRecord> = serde_json::from_value(hg_env.payload["hyperedges"].clone()).map_err(invalid)?;
    let hypergraph = DirectedHypergraph::from_records(corpus.names(), &records).map_err(invalid)?;
    let partition = communities_louvain(&fitted.graph, cfg.export.louvain_seed);
    let snapshot = Snapshot {
        corpus_digest: json_digest(&corpus),
        corpus,
        graph: fitted.graph,
        hypergraph,
        embeddings_digest: emb_in.digest.clone(),
        partition,
        config,
        created_at: creation_time(),
    };
    snapshot.validate().map_err(invalid)?;
    let mut text = snapshot.to_json_string();
    text.push('\n');
    artifact::write_atomic(paths.out, &text).map_err(CliError::Runtime)?;
    println!(
        "export: wrote {} ({} hyperedges, {} communities, modularity {:.3})",
        paths.out.display(),
        snapshot.hypergraph.len(),
        snapshot.partition.num_communities(),
        snapshot.partition.modularity
    );
    Ok(())
}

pub fn default_manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn simulate(cfg: &CliConfig, out: &Path, manifest_path: &Path, force: bool) -> Result<()> {
    let synth = &cfg.simulate;
    synth.validate().map_err(|e| invalid(format!("simulate: {e}")))?;
    synth.entity_names().map_err(|e| invalid(format!("simulate: {e}")))?;
    if !force && out.exists() {
        let old: Option<SynthManifest> = std::fs::read_to_string(manifest_path)
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok());
        if old.is_some_and(|m| &m.config == synth) {
            up_to_date("simulate", out);
            return Ok(());
        }
    }
    let (corpus, manifest) = simulate_planted(synth).map_err(runtime)?;
    let mut buf = Vec::new();
    corpus.write_jsonl(&mut buf).map_err(runtime)?;
    let text = String::from_utf8(buf).map_err(runtime)?;
    artifact::write_atomic(out, &text).map_err(CliError::Runtime)?;
    let mut mtext = serde_json::to_string_pretty(&serde_json::to_value(&manifest).map_err(runtime)?).map_err(runtime)?;
    mtext.push('\n');
    artifact::write_atomic(manifest_path, &mtext).map_err(CliError::Runtime)?;
    println!(
        "simulate: wrote {} ({} sequences, {} events) and {}",
        out.display(),
        corpus.num_sequences(),
        corpus.num_events(),
        manifest_path.display()
    );
    Ok(())
}

pub fn serve(config: ServiceConfig) -> Result<()> {
    config.validate().map_err(invalid)?;
    let state = AppState::from_config(&config).map_err(invalid)?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(runtime)?;
    rt.block_on(async move {
        let addr = format!("{}:{}", config.host, config.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))
            .map_err(CliError::Runtime)?;
        let local = listener.local_addr().map_err(runtime)?;
        println!("listening on http://{local}");
        std::io::stdout().flush().map_err(runtime)?;
        causeloom_service::serve_on(listener, state).await.map_err(runtime)
    })
}
