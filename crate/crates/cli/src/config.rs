use std::path::{Path, PathBuf};

use anyhow::Context;
use fielded_rerank::ltr::TrainConfig;
use fielded_rerank::{FsdmParams, SkipgramConfig};
use serde::Deserialize;

use crate::Invalid;

pub const CONFIG_ENV: &str = "FIELDED_RERANK_CONFIG";
pub const DEFAULT_POOL_SIZE: usize = 100;

/// Everything a pipeline run reads from the config file. Any value can be
/// overridden by the matching command-line flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub pool_size: Option<usize>,
    pub query_prefix: Option<String>,
    pub paths: Paths,
    pub fsdm: FsdmParams,
    pub train: TrainConfig,
    pub skipgram: SkipgramConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub training_text: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub word_vectors: Option<PathBuf>,
    pub entity_vectors: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub run: Option<PathBuf>,
    pub rerank_run: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("config {}", path.display()))?;
        let config = toml::from_str(&text).with_context(|| format!("config {}", path.display()))?;
        Ok(config)
    }
}

/// Picks the flag value, else the configured one, else fails naming both.
pub fn require(flag: &Option<PathBuf>, configured: &Option<PathBuf>, name: &str) -> anyhow::Result<PathBuf> {
    flag.clone().or_else(|| configured.clone()).ok_or_else(|| {
        Invalid(format!(
            "no {name} path: pass --{name} or set paths.{} in the config",
            name.replace('-', "_")
        ))
        .into()
    })
}
