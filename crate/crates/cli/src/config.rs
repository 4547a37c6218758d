//! Flat `key = value` run configuration: training settings plus dataset selection.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use cyclic_ff::training::{TrainConfig, TRAIN_KEYS};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Mnist,
    Synth,
    Embeddings,
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::Synth => "synth",
            DatasetKind::Embeddings => "embeddings",
        })
    }
}

impl FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mnist" => Ok(DatasetKind::Mnist),
            "synth" => Ok(DatasetKind::Synth),
            "embeddings" => Ok(DatasetKind::Embeddings),
            _ => Err(format!(
                "unknown dataset {s:?} (expected mnist, synth or embeddings)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub dataset: DatasetKind,
    /// Dataset root; falls back to `CYCLIC_FF_DATA_DIR`.
    pub data_dir: Option<PathBuf>,
    /// Embedding files; relative paths resolve against the dataset root.
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    pub val_fraction: f64,
    /// Exact validation count; overrides `val_fraction`.
    pub val_size: Option<usize>,
    /// Keep only this many training samples after the split.
    pub max_train: Option<usize>,
    /// Seeds the train/val split and synthetic data, independent of the run seed.
    pub data_seed: u64,
    pub synth_per_class: usize,
    pub synth_test_per_class: usize,
    pub synth_dim: usize,
    pub synth_classes: usize,
    pub synth_separation: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetKind::Synth,
            data_dir: None,
            train_path: None,
            test_path: None,
            val_fraction: 0.2,
            val_size: None,
            max_train: None,
            data_seed: 0,
            synth_per_class: 1000,
            synth_test_per_class: 500,
            synth_dim: 20,
            synth_classes: 2,
            synth_separation: 6.0,
        }
    }
}

pub const DATA_KEYS: &[&str] = &[
    "dataset",
    "data_dir",
    "train_path",
    "test_path",
    "val_fraction",
    "val_size",
    "max_train",
    "data_seed",
    "synth_per_class",
    "synth_test_per_class",
    "synth_dim",
    "synth_classes",
    "synth_separation",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("bad value {value:?} for {key}"))
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, String> {
    if value.is_empty() || value == "none" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn show_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
}

fn show_path(v: &Option<PathBuf>) -> String {
    v.as_ref()
        .map_or_else(|| "none".to_string(), |p| p.display().to_string())
}

impl DataConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "dataset" => self.dataset = value.parse()?,
            "data_dir" => self.data_dir = parse_opt(key, value)?,
            "train_path" => self.train_path = parse_opt(key, value)?,
            "test_path" => self.test_path = parse_opt(key, value)?,
            "val_fraction" => self.val_fraction = parse(key, value)?,
            "val_size" => self.val_size = parse_opt(key, value)?,
            "max_train" => self.max_train = parse_opt(key, value)?,
            "data_seed" => self.data_seed = parse(key, value)?,
            "synth_per_class" => self.synth_per_class = parse(key, value)?,
            "synth_test_per_class" => self.synth_test_per_class = parse(key, value)?,
            "synth_dim" => self.synth_dim = parse(key, value)?,
            "synth_classes" => self.synth_classes = parse(key, value)?,
            "synth_separation" => self.synth_separation = parse(key, value)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    fn to_pairs(&self) -> Vec<(String, String)> {
        let values = [
            self.dataset.to_string(),
            show_path(&self.data_dir),
            show_path(&self.train_path),
            show_path(&self.test_path),
            self.val_fraction.to_string(),
            show_opt(&self.val_size),
            show_opt(&self.max_train),
            self.data_seed.to_string(),
            self.synth_per_class.to_string(),
            self.synth_test_per_class.to_string(),
            self.synth_dim.to_string(),
            self.synth_classes.to_string(),
            self.synth_separation.to_string(),
        ];
        DATA_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub data: DataConfig,
}

pub fn is_known_key(key: &str) -> bool {
    TRAIN_KEYS.contains(&key) || DATA_KEYS.contains(&key)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        if DATA_KEYS.contains(&key) {
            self.data.set(key, value)
        } else {
            self.train.set(key, value).map_err(|e| match e {
                cyclic_ff::Error::Config(msg) => msg,
                other => other.to_string(),
            })
        }
    }

    /// Every effective setting, training keys first.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut pairs = self.train.to_pairs();
        pairs.extend(self.data.to_pairs());
        pairs
    }

    /// Short digest of every setting except the seed; names run artifacts.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.to_pairs() {
            if k != "seed" {
                h.update(format!("{k}={v}\n"));
            }
        }
        h.finalize()[..6]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Applies a config file's lines; errors carry the 1-based line number.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fail = |msg: String| CliError::Config(format!("{origin}:{}: {msg}", i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(format!("expected `key = value`, got {line:?}")))?;
            self.set(key.trim(), value).map_err(fail)?;
        }
        Ok(())
    }

    /// Applies `key=value` overrides from the command line.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), CliError> {
        for item in overrides {
            let (key, value) = split_override(item)?;
            self.set(key, value)
                .map_err(|msg| CliError::Config(format!("--set {item}: {msg}")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.train
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let d = &self.data;
        if !(0.0..1.0).contains(&d.val_fraction) {
            return Err(CliError::Config(format!(
                "val_fraction must be in [0, 1), got {}",
                d.val_fraction
            )));
        }
        if d.dataset == DatasetKind::Embeddings && (d.train_path.is_none() || d.test_path.is_none())
        {
            return Err(CliError::Config(
                "dataset = embeddings needs train_path and test_path".into(),
            ));
        }
        Ok(())
    }
}

pub fn split_override(item: &str) -> Result<(&str, &str), CliError> {
    let (key, value) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {item:?}")))?;
    let key = key.trim();
    if !is_known_key(key) {
        return Err(CliError::Config(format!(
            "--set {item}: unknown key {key:?}"
        )));
    }
    Ok((key, value.trim()))
}

/// Seeds from `--seeds`: `a..b` (inclusive) or a comma list.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Config(format!("bad seed list {spec:?} (use a..b or a,b,c)"));
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    let seeds = spec
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect::<Result<Vec<u64>, _>>()?;
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}
