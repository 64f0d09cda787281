//! Flat `key = value` run configuration with command-line overrides.
//!
//! Every run is reproducible from one config file; command-line flags
//! override file values, file values override defaults. Unknown keys are
//! rejected so typos do not silently fall back to defaults.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use lexidebias::embedding::EmbeddingFormat;
use lexidebias::gloss::GlossMode;
use lexidebias::model::Hyperparams;
use lexidebias::sif::{SifConfig, WeightMode};

use crate::CliError;

const KNOWN_KEYS: &[&str] = &[
    "embeddings",
    "format",
    "dictionary",
    "gloss_mode",
    "out",
    "checkpoint",
    "out_checkpoint",
    "loss_csv",
    "defs_cache",
    "compare",
    "dev_size",
    "seed",
    "alpha",
    "beta",
    "gamma",
    "learning_rate",
    "dropout",
    "batch_size",
    "pretrain_batch_size",
    "pretrain_words",
    "epochs",
    "patience",
    "sif_a",
    "weight_mode",
    "trials",
    "weat_spec",
    "graph",
    "seeds_file",
    "sembias",
    "pairs",
    "analogies",
    "words",
    "directions",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    i + 1
                )));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!(
                    "{}:{}: unknown config key {key:?}",
                    path.display(),
                    i + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(text) => text
                .parse()
                .map(Some)
                .map_err(|_| CliError::usage(format!("config key {key} has invalid value {text:?}"))),
        }
    }

    pub fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(PathBuf::from)
    }
}

/// `flag.or(config).unwrap_or(default)` for one scalar setting.
fn resolve<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn resolve_hyper(flags: &crate::HyperFlags, cfg: &ConfigFile) -> Result<Hyperparams, CliError> {
    let defaults = Hyperparams::default();
    let hyper = Hyperparams {
        alpha: resolve(flags.alpha, cfg.get_parsed("alpha")?, defaults.alpha),
        beta: resolve(flags.beta, cfg.get_parsed("beta")?, defaults.beta),
        gamma: resolve(flags.gamma, cfg.get_parsed("gamma")?, defaults.gamma),
        learning_rate: resolve(flags.learning_rate, cfg.get_parsed("learning_rate")?, defaults.learning_rate),
        dropout_p: resolve(flags.dropout, cfg.get_parsed("dropout")?, defaults.dropout_p),
        batch_size: resolve(flags.batch_size, cfg.get_parsed("batch_size")?, defaults.batch_size),
        pretrain_batch_size: resolve(
            flags.pretrain_batch_size,
            cfg.get_parsed("pretrain_batch_size")?,
            defaults.pretrain_batch_size,
        ),
        pretrain_words: resolve(flags.pretrain_words, cfg.get_parsed("pretrain_words")?, defaults.pretrain_words),
        epochs: resolve(flags.epochs, cfg.get_parsed("epochs")?, defaults.epochs),
        patience: resolve(flags.patience, cfg.get_parsed("patience")?, defaults.patience),
        seed: resolve(flags.seed, cfg.get_parsed("seed")?, defaults.seed),
    };
    hyper.validate().map_err(CliError::from)?;
    Ok(hyper)
}

pub fn resolve_sif(flags: &crate::SifFlags, cfg: &ConfigFile) -> Result<SifConfig, CliError> {
    let defaults = SifConfig::default();
    let weight_mode = match flags
        .weight_mode
        .as_deref()
        .or(cfg.get("weight_mode"))
    {
        None => defaults.weight_mode,
        Some("sif") => WeightMode::Sif,
        Some("inverse-prob") | Some("inverse_prob") => WeightMode::InverseProb,
        Some(other) => {
            return Err(CliError::usage(format!(
                "weight_mode must be sif or inverse-prob, got {other:?}"
            )))
        }
    };
    let sif = SifConfig {
        smoothing: resolve(flags.sif_a, cfg.get_parsed("sif_a")?, defaults.smoothing),
        weight_mode,
        ..defaults
    };
    sif.validate().map_err(CliError::from)?;
    Ok(sif)
}

pub fn resolve_gloss_mode(flag: Option<&str>, cfg: &ConfigFile) -> Result<GlossMode, CliError> {
    match flag.or(cfg.get("gloss_mode")) {
        None | Some("all") => Ok(GlossMode::All),
        Some("dominant") => Ok(GlossMode::Dominant),
        Some(other) => Err(CliError::usage(format!(
            "gloss mode must be all or dominant, got {other:?}"
        ))),
    }
}

pub fn resolve_format(flag: Option<&str>, cfg: &ConfigFile) -> Result<EmbeddingFormat, CliError> {
    match flag.or(cfg.get("format")) {
        None | Some("word2vec-text") | Some("word2vec_text") => Ok(EmbeddingFormat::Word2vecText),
        Some("glove-text") | Some("glove_text") => Ok(EmbeddingFormat::GloveText),
        Some(other) => Err(CliError::usage(format!(
            "format must be word2vec-text or glove-text, got {other:?}"
        ))),
    }
}

/// Resolves a path setting and checks the file exists.
pub fn require_input_path(
    flag: Option<&PathBuf>,
    cfg: &ConfigFile,
    key: &str,
) -> Result<PathBuf, CliError> {
    let path = flag
        .cloned()
        .or_else(|| cfg.get_path(key))
        .ok_or_else(|| CliError::usage(format!("missing required {key} path")))?;
    if !path.is_file() {
        return Err(CliError::usage(format!(
            "{key} path {} does not exist",
            path.display()
        )));
    }
    Ok(path)
}

pub fn optional_input_path(
    flag: Option<&PathBuf>,
    cfg: &ConfigFile,
    key: &str,
) -> Result<Option<PathBuf>, CliError> {
    match flag.cloned().or_else(|| cfg.get_path(key)) {
        None => Ok(None),
        Some(path) => {
            if !path.is_file() {
                return Err(CliError::usage(format!(
                    "{key} path {} does not exist",
                    path.display()
                )));
            }
            Ok(Some(path))
        }
    }
}

pub fn require_output_path(
    flag: Option<&PathBuf>,
    cfg: &ConfigFile,
    key: &str,
) -> Result<PathBuf, CliError> {
    flag.cloned()
        .or_else(|| cfg.get_path(key))
        .ok_or_else(|| CliError::usage(format!("missing required {key} path")))
}
