//! The structured config file: one TOML table per subcommand.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use causeloom_core::combo::ComboRuleConfig;
use causeloom_core::embeddings::SkipGramConfig;
use causeloom_core::rpp::FitConfig;
use causeloom_core::synth::SynthConfig;
use causeloom_service::ServiceConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub ingest: IngestConfig,
    pub embed: SkipGramConfig,
    pub fit: FitStage,
    pub combine: ComboRuleConfig,
    pub export: ExportConfig,
    pub simulate: SynthConfig,
    pub serve: ServiceConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    /// `jsonl` or `csv`; guessed from the file extension when unset.
    pub format: Option<String>,
    /// Keep only the most frequent entities.
    pub top_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitStage {
    /// Number of basis kernels.
    pub basis: usize,
    #[serde(flatten)]
    pub solver: FitConfig<f64>,
}

impl Default for FitStage {
    fn default() -> Self {
        Self {
            basis: 3,
            solver: FitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExportConfig {
    pub louvain_seed: u64,
}

impl CliConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("config {}", path.display()))
    }

    /// Parses and rejects keys that no section knows about.
    pub fn from_toml_str(text: &str) -> anyhow::Result<Self> {
        let raw: toml::Table = toml::from_str(text).map_err(|e| anyhow!("{e}"))?;
        let known = serde_json::to_value(CliConfig::default())?;
        for (section, value) in &raw {
            let Some(fields) = known.get(section).and_then(|v| v.as_object()) else {
                bail!("unknown section [{section}]");
            };
            let Some(table) = value.as_table() else {
                bail!("{section}: expected a table");
            };
            if let Some(key) = table.keys().find(|k| !fields.contains_key(*k)) {
                bail!("unknown key {section}.{key}");
            }
        }
        toml::from_str(text).map_err(|e| match locate_bad_key(&raw) {
            Some(key) => anyhow!("{key}: {}", e.message()),
            None => anyhow!("{e}"),
        })
    }
}

/// Flattened sections lose field names in serde errors; retry key by key.
fn locate_bad_key(raw: &toml::Table) -> Option<String> {
    for (section, value) in raw {
        for (key, v) in value.as_table()? {
            let mut one = toml::Table::new();
            one.insert(section.clone(), toml::Value::Table(toml::Table::from_iter([(key.clone(), v.clone())])));
            if one.try_into::<CliConfig>().is_err() {
                return Some(format!("{section}.{key}"));
            }
        }
    }
    None
}
