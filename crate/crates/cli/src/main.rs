//! `causeloom`: drive the analysis pipeline and serve its results.
//!
//! Exit codes: 0 success, 2 invalid input or config, 3 runtime failure.

mod artifact;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::commands::{CombinePaths, ExportPaths};
use crate::config::CliConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0:#}")]
    Validation(anyhow::Error),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "causeloom", version, about = "Combined causality analysis for temporal event sequences")]
struct Cli {
    /// TOML config with one table per subcommand; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Recompute even when the output is current.
    #[arg(long, global = true)]
    force: bool,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a JSONL or CSV event log into a corpus artifact.
    Ingest(IngestArgs),
    /// Train entity embeddings on a corpus.
    Embed(EmbedArgs),
    /// Fit the point process and derive the signed causal graph.
    Fit(FitArgs),
    /// Search for combined causes.
    Combine(CombineArgs),
    /// Bundle everything into the snapshot the service loads.
    Export(ExportArgs),
    /// Generate a synthetic corpus with planted combined causes.
    Simulate(SimulateArgs),
    /// Serve a snapshot over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Raw event log.
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// jsonl or csv; guessed from the extension by default.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct EmbedArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct FitArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    basis: Option<usize>,
    #[arg(long)]
    smoothing: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    strength_threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct CombineArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(long)]
    min_similarity: Option<f64>,
    #[arg(long)]
    min_cooccurrence: Option<u64>,
    #[arg(long)]
    recruit_similarity: Option<f64>,
    #[arg(long)]
    recruit_cooccurrence: Option<u64>,
    #[arg(long)]
    tie_window: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct ExportArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    hypergraph: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    louvain_seed: Option<u64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    /// Corpus output, JSONL.
    #[arg(long)]
    out: PathBuf,
    /// Ground truth output; defaults to `<out>.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    entities: Option<usize>,
    /// Planted combined cause such as "b,c->H" (repeatable).
    #[arg(long = "plant")]
    plants: Vec<String>,
    #[arg(long)]
    sequences: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    background_rate: Option<f64>,
    #[arg(long)]
    joint_rate: Option<f64>,
    #[arg(long)]
    trigger_probability: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[arg(long)]
    journal: Option<PathBuf>,
    #[arg(long)]
    host: Option<String>,
    #[arg(long)]
    port: Option<u16>,
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => CliConfig::load(path).map_err(CliError::Validation)?,
        None => CliConfig::default(),
    };
    let force = cli.force;
    match cli.command {
        Command::Ingest(a) => {
            if a.format.is_some() {
                cfg.ingest.format = a.format;
            }
            if a.top_k.is_some() {
                cfg.ingest.top_k = a.top_k;
            }
            commands::ingest(&cfg.ingest, &a.input, &a.out, force)
        }
        Command::Embed(a) => {
            let e = &mut cfg.embed;
            set(&mut e.dimension, a.dimension);
            set(&mut e.radius, a.radius);
            set(&mut e.negatives, a.negatives);
            set(&mut e.epochs, a.epochs);
            set(&mut e.learning_rate, a.learning_rate);
            set(&mut e.seed, a.seed);
            commands::embed(&cfg, &a.corpus, &a.out, force)
        }
        Command::Fit(a) => {
            set(&mut cfg.fit.basis, a.basis);
            let s = &mut cfg.fit.solver;
            set(&mut s.smoothing, a.smoothing);
            set(&mut s.alpha, a.alpha);
            set(&mut s.beta, a.beta);
            set(&mut s.mc_samples, a.mc_samples);
            set(&mut s.max_iterations, a.max_iterations);
            set(&mut s.tolerance, a.tolerance);
            set(&mut s.strength_threshold, a.strength_threshold);
            set(&mut s.seed, a.seed);
            commands::fit(&cfg, &a.corpus, &a.out, force)
        }
        Command::Combine(a) => {
            let r = &mut cfg.combine;
            set(&mut r.max_size, a.max_size);
            set(&mut r.min_similarity, a.min_similarity);
            set(&mut r.min_cooccurrence, a.min_cooccurrence);
            set(&mut r.recruit_similarity, a.recruit_similarity);
            set(&mut r.recruit_cooccurrence, a.recruit_cooccurrence);
            set(&mut r.tie_window, a.tie_window);
            let paths = CombinePaths {
                corpus: &a.corpus,
                params: &a.params,
                embeddings: &a.embeddings,
                out: &a.out,
            };
            commands::combine(&cfg, &paths, force)
        }
        Command::Export(a) => {
            set(&mut cfg.export.louvain_seed, a.louvain_seed);
            let paths = ExportPaths {
                corpus: &a.corpus,
                params: &a.params,
                embeddings: &a.embeddings,
                hypergraph: &a.hypergraph,
                out: &a.out,
            };
            commands::export(&cfg, &paths, force)
        }
        Command::Simulate(a) => {
            let s = &mut cfg.simulate;
            set(&mut s.entities, a.entities);
            if !a.plants.is_empty() {
                s.plants = a
                    .plants
                    .iter()
                    .map(|p| p.parse())
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Validation(anyhow::anyhow!("--plant: {e}")))?;
            }
            set(&mut s.sequences, a.sequences);
            set(&mut s.horizon, a.horizon);
            set(&mut s.background_rate, a.background_rate);
            set(&mut s.joint_rate, a.joint_rate);
            set(&mut s.trigger_probability, a.trigger_probability);
            set(&mut s.seed, a.seed);
            let manifest = a.manifest.unwrap_or_else(|| commands::default_manifest_path(&a.out));
            commands::simulate(&cfg, &a.out, &manifest, force)
        }
        Command::Serve(a) => {
            let mut service = cfg.serve.with_env_overrides().map_err(|e| CliError::Validation(e.into()))?;
            if a.snapshot.is_some() {
                service.snapshot = a.snapshot;
            }
            if a.journal.is_some() {
                service.journal = a.journal;
            }
            set(&mut service.host, a.host);
            set(&mut service.port, a.port);
            commands::serve(service)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
