//! Generation config files: TOML with one [[config]] block per
//! configuration. Keys map one-to-one onto GenerationConfig; unknown keys
//! are rejected by name so typos surface immediately.

use anyhow::{bail, Context, Result};
use mcd_core::gen::{Decoding, GenerationConfig, SizeClass};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub config: Vec<ConfigEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEntry {
    pub name: String,
    /// Model size class: base, large, or mega.
    #[serde(default = "default_size")]
    pub size: String,
    /// Decoding method: top_k or top_p.
    pub method: String,
    pub k: Option<usize>,
    pub p: Option<f64>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_cond_len")]
    pub cond_len: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
}

fn default_size() -> String {
    "large".to_string()
}
fn default_temperature() -> f64 {
    1.0
}
fn default_cond_len() -> usize {
    10
}
fn default_max_len() -> usize {
    200
}

impl ConfigEntry {
    pub fn to_generation_config(&self, seed: u64) -> Result<GenerationConfig> {
        let size_class = match self.size.as_str() {
            "base" => SizeClass::Base,
            "large" => SizeClass::Large,
            "mega" => SizeClass::Mega,
            other => bail!("config {:?}: unknown size {other:?} (base, large, mega)", self.name),
        };
        let decoding = match (self.method.as_str(), self.k, self.p) {
            ("top_k", Some(k), None) => Decoding::TopK { k },
            ("top_p", None, Some(p)) => Decoding::TopP { p },
            ("top_k", None, _) => bail!("config {:?}: top_k needs k", self.name),
            ("top_p", _, None) => bail!("config {:?}: top_p needs p", self.name),
            ("top_k", _, Some(_)) | ("top_p", Some(_), _) => {
                bail!("config {:?}: give k xor p, matching the method", self.name)
            }
            (other, _, _) => {
                bail!("config {:?}: unknown method {other:?} (top_k, top_p)", self.name)
            }
        };
        Ok(GenerationConfig {
            size_class,
            decoding,
            temperature: self.temperature,
            cond_len: self.cond_len,
            max_len: self.max_len,
            seed,
        })
    }
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("config file {}", path.display()))?;
    let file: ConfigFile =
        toml::from_str(&text).with_context(|| format!("config file {}", path.display()))?;
    if file.config.is_empty() {
        bail!("config file {}: no [[config]] blocks", path.display());
    }
    let mut seen = std::collections::HashSet::new();
    for entry in &file.config {
        if !seen.insert(entry.name.as_str()) {
            bail!("config file {}: duplicate config name {:?}", path.display(), entry.name);
        }
    }
    Ok(file)
}
