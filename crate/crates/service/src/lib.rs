//! HTTP JSON API serving a precomputed snapshot plus live amendments.
//!
//! Readers take an `Arc` of the current view (snapshot, journal length,
//! amended hypergraph) and never see a torn state. Amendments go through a
//! single writer that fsyncs the journal before swapping in the next view.

mod api;
pub mod config;
pub mod journal;
mod render;
mod state;

use std::path::PathBuf;

use thiserror::Error;

pub use api::router;
pub use config::ServiceConfig;
pub use journal::Journal;
pub use render::{GraphQuery, PropagationQuery};
pub use state::{AppState, View};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid service config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corrupt journal {path}: {detail}")]
    Journal { path: PathBuf, detail: String },

    #[error(transparent)]
    Snapshot(#[from] causeloom_core::snapshot::SnapshotError),
}

pub type Result<T> = std::result::Result<T, ServiceError>;

/// Loads the configured snapshot (if any) and serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> Result<()> {
    let state = AppState::from_config(&config)?;
    let addr = format!("{}:{}", config.host, config.port);
    let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|source| ServiceError::Io {
        path: PathBuf::from(&addr),
        source,
    })?;
    serve_on(listener, state).await
}

/// Serves `state` on an already bound listener until ctrl-c.
pub async fn serve_on(listener: tokio::net::TcpListener, state: AppState) -> Result<()> {
    let io = |source| ServiceError::Io {
        path: PathBuf::from("<listener>"),
        source,
    };
    log::info!("listening on http://{}", listener.local_addr().map_err(io)?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(io)
}
