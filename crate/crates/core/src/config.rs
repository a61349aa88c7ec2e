//! Layered run configuration: built-in defaults, then `extsumm.toml`, then
//! `EXTSUMM_*` environment variables, then command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetTag, SectionKeywordMap};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::oracle::{GainMetric, OracleConfig};
use crate::trainer::TrainConfig;

pub const CONFIG_FILE: &str = "extsumm.toml";
pub const ENV_PREFIX: &str = "EXTSUMM_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data_dir: Option<PathBuf>,
    pub dataset: DatasetTag,
    /// JSON file of `CATEGORY -> [keywords]` replacing the default map.
    pub section_keyword_map: Option<PathBuf>,
    pub oracle_k: Option<usize>,
    pub min_summary_tokens: Option<usize>,
    pub gain: GainMetric,
    pub diversity: bool,
    pub top_k: Option<usize>,
    pub trigram_blocking: bool,
    pub alpha: f64,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub d: usize,
    pub n_context_layers: usize,
    pub n_heads: usize,
    pub max_sentences: usize,
    pub dropout: f64,
    pub vocab_size: usize,
    pub lr: f64,
    pub batch_docs: usize,
    pub max_steps: usize,
    pub val_interval: usize,
    pub grad_clip_norm: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let model = ModelConfig::default();
        let train = TrainConfig::default();
        RunConfig {
            data_dir: None,
            dataset: DatasetTag::Custom,
            section_keyword_map: None,
            oracle_k: None,
            min_summary_tokens: None,
            gain: GainMetric::default(),
            diversity: true,
            top_k: None,
            trigram_blocking: false,
            alpha: model.alpha,
            seed: 0,
            jobs: None,
            d: model.d,
            n_context_layers: model.n_context_layers,
            n_heads: model.n_heads,
            max_sentences: model.max_sentences,
            dropout: model.dropout,
            vocab_size: model.vocab_size,
            lr: train.lr,
            batch_docs: train.batch_docs,
            max_steps: train.max_steps,
            val_interval: train.val_interval,
            grad_clip_norm: train.grad_clip_norm,
        }
    }
}

/// Oracle budget when neither a flag nor the dataset preset provides one.
pub const DEFAULT_ORACLE_K: usize = 15;
pub const DEFAULT_MIN_SUMMARY_TOKENS: usize = 350;

fn parse_env_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    /// Merges an optional config file and environment variables over the defaults.
    pub fn load(
        file: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self> {
        let mut table = match toml::Value::try_from(RunConfig::default()) {
            Ok(toml::Value::Table(t)) => t,
            _ => unreachable!("RunConfig serializes to a table"),
        };
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let overlay: toml::Table = toml::from_str(&text)
                .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
            table.extend(overlay);
        }
        for (key, value) in env {
            if let Some(name) = key.strip_prefix(ENV_PREFIX) {
                let name = name.to_ascii_lowercase();
                if table.contains_key(&name) || RunConfig::optional_keys().contains(&name.as_str())
                {
                    table.insert(name, parse_env_value(&value));
                }
            }
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e| Error::config(e.to_string()))
    }

    /// Keys whose default is `None` and therefore absent from the default table.
    fn optional_keys() -> &'static [&'static str] {
        &[
            "data_dir",
            "section_keyword_map",
            "oracle_k",
            "min_summary_tokens",
            "top_k",
            "jobs",
            "grad_clip_norm",
        ]
    }

    /// Config file from `--config`, else `./extsumm.toml` when present.
    pub fn discover(explicit: Option<&Path>) -> Result<Self> {
        let default_file = Path::new(CONFIG_FILE);
        let file = explicit.or_else(|| default_file.exists().then_some(default_file));
        RunConfig::load(file, std::env::vars())
    }

    /// Relative paths that do not exist are looked up under `data_dir`.
    pub fn resolve_path(&self, path: &Path) -> PathBuf {
        match &self.data_dir {
            Some(root) if path.is_relative() && !path.exists() => root.join(path),
            _ => path.to_path_buf(),
        }
    }

    pub fn keyword_map(&self) -> Result<SectionKeywordMap> {
        match &self.section_keyword_map {
            Some(p) => SectionKeywordMap::from_json_file(&self.resolve_path(p)),
            None => Ok(SectionKeywordMap::default()),
        }
    }

    pub fn oracle_k(&self) -> usize {
        self.oracle_k
            .or(self.dataset.oracle_k())
            .unwrap_or(DEFAULT_ORACLE_K)
    }

    pub fn top_k(&self) -> usize {
        self.top_k.unwrap_or_else(|| self.oracle_k())
    }

    pub fn min_summary_tokens(&self) -> usize {
        self.min_summary_tokens.unwrap_or(match self.dataset {
            DatasetTag::Longsumm => 0,
            other => other
                .min_summary_tokens()
                .unwrap_or(DEFAULT_MIN_SUMMARY_TOKENS),
        })
    }

    pub fn oracle_config(&self) -> Result<OracleConfig> {
        OracleConfig::new(self.oracle_k(), self.gain, self.diversity)
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        let cfg = ModelConfig {
            d: self.d,
            vocab_size: self.vocab_size,
            n_context_layers: self.n_context_layers,
            n_heads: self.n_heads,
            sections: crate::corpus::SectionCategory::COUNT,
            alpha: self.alpha,
            max_sentences: self.max_sentences,
            dropout: self.dropout,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            lr: self.lr,
            batch_docs: self.batch_docs,
            max_steps: self.max_steps,
            val_interval: self.val_interval,
            grad_clip_norm: self.grad_clip_norm,
            seed: self.seed,
            top_k: self.top_k(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn defaults_and_presets() {
        let cfg = RunConfig::load(None, env(&[])).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.oracle_k(), 15);
        assert_eq!(cfg.min_summary_tokens(), 350);
        assert!(!cfg.trigram_blocking);
        assert_eq!(cfg.alpha, 0.5);

        let pubmed = RunConfig::load(None, env(&[("EXTSUMM_DATASET", "pubmed-long")])).unwrap();
        assert_eq!(pubmed.oracle_k(), 25);
        assert_eq!(pubmed.top_k(), 25);
        let longsumm = RunConfig::load(None, env(&[("EXTSUMM_DATASET", "longsumm")])).unwrap();
        assert_eq!(longsumm.oracle_k(), 30);
        assert_eq!(longsumm.min_summary_tokens(), 0);
    }

    #[test]
    fn env_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(CONFIG_FILE);
        std::fs::write(
            &path,
            "alpha = 0.7\nseed = 3\noracle_k = 9\ndata_dir = \"/from/file\"\n",
        )
        .unwrap();
        let file_only = RunConfig::load(Some(&path), env(&[])).unwrap();
        assert_eq!(
            (file_only.alpha, file_only.seed, file_only.oracle_k()),
            (0.7, 3, 9)
        );

        let both = RunConfig::load(
            Some(&path),
            env(&[
                ("EXTSUMM_SEED", "11"),
                ("EXTSUMM_DATA_DIR", "/from/env"),
                ("EXTSUMM_TOP_K", "4"),
                ("UNRELATED", "x"),
            ]),
        )
        .unwrap();
        assert_eq!(both.seed, 11);
        assert_eq!(both.alpha, 0.7);
        assert_eq!(both.data_dir.as_deref(), Some(Path::new("/from/env")));
        assert_eq!(both.top_k(), 4);
    }

    #[test]
    fn bad_values_rejected() {
        assert!(RunConfig::load(None, env(&[("EXTSUMM_ALPHA", "lots")])).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "no_such_key = 1\n").unwrap();
        assert!(RunConfig::load(Some(&path), env(&[])).is_err());
    }

    #[test]
    fn relative_paths_fall_back_to_data_dir() {
        let cfg = RunConfig {
            data_dir: Some(PathBuf::from("/data/root")),
            ..Default::default()
        };
        assert_eq!(
            cfg.resolve_path(Path::new("missing.jsonl")),
            Path::new("/data/root/missing.jsonl")
        );
        assert_eq!(
            cfg.resolve_path(Path::new("/abs.jsonl")),
            Path::new("/abs.jsonl")
        );
    }
}
