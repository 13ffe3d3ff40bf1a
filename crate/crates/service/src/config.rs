use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Result, ServiceError};

pub const PORT_ENV: &str = "CAUSELOOM_PORT";
pub const SNAPSHOT_ENV: &str = "CAUSELOOM_SNAPSHOT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    pub snapshot: Option<PathBuf>,
    /// Defaults to the snapshot path with `.journal.jsonl` appended.
    pub journal: Option<PathBuf>,
    /// Number of alternative paths fed to the layered propagation layout.
    pub propagation_paths: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 8080,
            snapshot: None,
            journal: None,
            propagation_paths: 3,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| ServiceError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ServiceError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Applies `CAUSELOOM_PORT` and `CAUSELOOM_SNAPSHOT` when set.
    pub fn with_env_overrides(self) -> Result<Self> {
        self.with_overrides(|k| std::env::var(k).ok())
    }

    pub fn with_overrides(mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<Self> {
        if let Some(port) = lookup(PORT_ENV) {
            self.port = port
                .trim()
                .parse()
                .map_err(|_| ServiceError::Config(format!("{PORT_ENV}: {port:?} is not a port number")))?;
        }
        if let Some(path) = lookup(SNAPSHOT_ENV) {
            self.snapshot = Some(PathBuf::from(path));
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.host.is_empty() {
            return Err(ServiceError::Config("host: must not be empty".into()));
        }
        if self.propagation_paths == 0 {
            return Err(ServiceError::Config("propagation_paths: must be at least 1".into()));
        }
        Ok(())
    }

    pub fn journal_path(&self) -> Option<PathBuf> {
        self.journal.clone().or_else(|| self.snapshot.as_deref().map(default_journal_path))
    }
}

pub fn default_journal_path(snapshot: &Path) -> PathBuf {
    let mut s = snapshot.as_os_str().to_os_string();
    s.push(".journal.jsonl");
    PathBuf::from(s)
}
