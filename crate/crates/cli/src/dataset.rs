use std::env;
use std::path::{Path, PathBuf};

use cyclic_ff::data::{load_embeddings, load_mnist_dir, split_counts, synth_blobs};
use cyclic_ff::{Dataset, RngState, Stream};

use crate::config::{DataConfig, DatasetKind};
use crate::error::CliError;

pub const DATA_DIR_ENV: &str = "CYCLIC_FF_DATA_DIR";

#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

fn data_root(cfg: &DataConfig) -> Option<PathBuf> {
    cfg.data_dir
        .clone()
        .or_else(|| env::var_os(DATA_DIR_ENV).map(PathBuf::from))
}

fn resolve(root: Option<&Path>, p: &Path) -> PathBuf {
    match root {
        Some(r) if p.is_relative() => r.join(p),
        _ => p.to_path_buf(),
    }
}

fn missing(what: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot load {what}: {e}"))
}

/// Raw feature width and class count without reading sample data where possible.
pub fn shape_of(cfg: &DataConfig) -> Result<(usize, usize), CliError> {
    match cfg.dataset {
        DatasetKind::Mnist => Ok((784, 10)),
        DatasetKind::Synth => Ok((cfg.synth_dim, cfg.synth_classes)),
        DatasetKind::Embeddings => {
            let (train, _) = load_pair(cfg)?;
            Ok((train.dim(), train.n_classes))
        }
    }
}

/// Train and test sets before the validation split.
fn load_pair(cfg: &DataConfig) -> Result<(Dataset, Dataset), CliError> {
    let root = data_root(cfg);
    match cfg.dataset {
        DatasetKind::Mnist => {
            let dir = root.ok_or_else(|| {
                CliError::Config(format!("mnist needs data_dir or {DATA_DIR_ENV}"))
            })?;
            load_mnist_dir(&dir).map_err(|e| missing(&format!("mnist from {}", dir.display()), e))
        }
        DatasetKind::Synth => {
            let mut rng = RngState::new(cfg.data_seed, Stream::Synthetic);
            let blobs = |n, rng: &mut RngState| {
                synth_blobs(
                    n,
                    cfg.synth_dim,
                    cfg.synth_classes,
                    cfg.synth_separation,
                    rng,
                )
                .map_err(|e| CliError::Config(e.to_string()))
            };
            let train = blobs(cfg.synth_per_class, &mut rng)?;
            let test = blobs(cfg.synth_test_per_class, &mut rng)?;
            Ok((train, test))
        }
        DatasetKind::Embeddings => {
            let load = |p: &Option<PathBuf>, what: &str| {
                let p = p
                    .as_ref()
                    .ok_or_else(|| CliError::Config(format!("{what} is not set")))?;
                let p = resolve(root.as_deref(), p);
                load_embeddings(&p).map_err(|e| missing(&p.display().to_string(), e))
            };
            let train = load(&cfg.train_path, "train_path")?;
            let test = load(&cfg.test_path, "test_path")?;
            if train.dim() != test.dim() || train.n_classes != test.n_classes {
                return Err(CliError::Config(
                    "train and test embeddings disagree in width or classes".into(),
                ));
            }
            Ok((train, test))
        }
    }
}

/// MNIST keeps the conventional 50k/10k train/validation split.
pub const MNIST_VAL_SIZE: usize = 10_000;

/// Loads the configured dataset and holds out the validation split.
pub fn load(cfg: &DataConfig) -> Result<Splits, CliError> {
    let (full, test) = load_pair(cfg)?;
    let n_val = match (cfg.val_size, cfg.dataset) {
        (Some(n), _) => n,
        (None, DatasetKind::Mnist) => MNIST_VAL_SIZE,
        (None, _) => (cfg.val_fraction * full.len() as f64).round() as usize,
    };
    let (mut train, val) = split_counts(
        &full,
        n_val,
        &mut RngState::new(cfg.data_seed, Stream::Split),
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(max) = cfg.max_train {
        train = train.range(0, max.min(train.len()));
    }
    Ok(Splits { train, val, test })
}
