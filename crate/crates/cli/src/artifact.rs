//! JSON artifact envelopes: `{artifact, config, inputs, payload}`.
//!
//! `inputs` maps each upstream role to the sha-256 of the file consumed, so
//! a stage can tell whether its output is still current.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use causeloom_core::digest::sha256_hex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub artifact: String,
    pub config: Value,
    pub inputs: BTreeMap<String, String>,
    pub payload: Value,
}

/// An upstream file read once, with its digest.
pub struct Input {
    pub role: &'static str,
    pub digest: String,
    pub text: String,
}

impl Input {
    pub fn read(role: &'static str, path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("missing upstream {role} artifact {}", path.display()))
            .map_err(CliError::Validation)?;
        Ok(Self {
            role,
            digest: sha256_hex(&text),
            text,
        })
    }

    /// Parses an envelope and checks its kind.
    pub fn envelope(&self, kind: &str) -> Result<Envelope, CliError> {
        let env: Envelope = serde_json::from_str(&self.text)
            .with_context(|| format!("{} input is not a causeloom artifact", self.role))
            .map_err(CliError::Validation)?;
        if env.artifact != kind {
            return Err(CliError::Validation(anyhow::anyhow!(
                "{} input is a {:?} artifact, expected {kind:?}",
                self.role,
                env.artifact
            )));
        }
        Ok(env)
    }
}

pub fn digests(inputs: &[&Input]) -> BTreeMap<String, String> {
    inputs.iter().map(|i| (i.role.to_string(), i.digest.clone())).collect()
}

/// True when `out` already holds this artifact built from the same inputs
/// and config.
pub fn is_current(out: &Path, kind: &str, config: &Value, inputs: &BTreeMap<String, String>) -> bool {
    let Ok(text) = std::fs::read_to_string(out) else {
        return false;
    };
    match serde_json::from_str::<Envelope>(&text) {
        Ok(env) => env.artifact == kind && &env.config == config && &env.inputs == inputs,
        Err(_) => false,
    }
}

/// Writes via a temporary file and rename so a crash never leaves a
/// truncated artifact behind.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let Some(name) = path.file_name() else {
        bail!("{} is not a file path", path.display());
    };
    let mut tmp_name = name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("cannot move {} into place", tmp.display()))?;
    Ok(())
}

pub fn write(path: &Path, env: &Envelope) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(&serde_json::to_value(env)?)?;
    text.push('\n');
    write_atomic(path, &text)
}
