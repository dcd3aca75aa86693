//! Run manifests. A manifest pins everything a run depends on — corpus hash,
//! task specs (with their per-class generation configs and seeds), training
//! config, tool version — so the run can be reproduced bit for bit. The
//! creation timestamp is carried but never part of run identity.

use std::fs;
use std::io::Read;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::TaskSpec;
use crate::error::{Error, Result};
use crate::gen::backend::BackendKind;
use crate::gen::config::GenerationConfig;
use crate::train::TrainConfig;
use crate::zoo::EncoderKind;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    hex::encode(h.finalize())
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Everything that determines a run's outputs. Two runs with equal recipes
/// produce identical artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecipe {
    pub tool_version: String,
    pub run_seed: u64,
    pub corpus_path: String,
    pub corpus_sha256: String,
    pub max_vocab: usize,
    pub backend: BackendKind,
    pub tasks: Vec<TaskSpec>,
    pub n_per_class: usize,
    pub strip_prompt: bool,
    pub train: TrainConfig,
    pub models: Vec<EncoderKind>,
}

impl RunRecipe {
    /// Flat view of every generation config the run touches, task order.
    pub fn generation_configs(&self) -> Vec<&GenerationConfig> {
        self.tasks.iter().flat_map(|t| t.classes.iter()).collect()
    }

    /// The corpus on disk must still be the one the recipe was written for.
    pub fn check_corpus(&self, path: &Path) -> Result<()> {
        let got = file_sha256(path)?;
        if got != self.corpus_sha256 {
            return Err(Error::Checkpoint(format!(
                "corpus {} hashes to {got}, manifest expects {}",
                path.display(),
                self.corpus_sha256
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Seconds since the Unix epoch at creation. Informational only.
    pub created_unix: u64,
    pub recipe: RunRecipe,
}

impl RunManifest {
    pub fn new(recipe: RunRecipe) -> RunManifest {
        let created_unix =
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        RunManifest { created_unix, recipe }
    }

    pub fn same_run(&self, other: &RunManifest) -> bool {
        self.recipe == other.recipe
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Checkpoint(format!("manifest encode: {e}")))?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| {
            Error::Checkpoint(format!("manifest {} decode: {e}", path.display()))
        })
    }
}
