//! Datasets, loaders, label fusion and batching.

mod embeddings;
mod fusion;
mod mnist;
mod split;
mod synth;

pub use embeddings::{load_embeddings, read_embeddings, save_embeddings, write_embeddings};
pub use fusion::{fuse_inputs, fuse_neutral, FusedBatch, FusionMode};
pub use mnist::{load_mnist_dir, load_mnist_idx, parse_idx_images, parse_idx_labels};
pub use split::{split_and_batch, split_counts, Batcher};
pub use synth::synth_blobs;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Labelled samples: one feature row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub name: String,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::Consistency(format!(
                "{} labels for {} samples",
                labels.len(),
                features.rows()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Consistency(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }
        if !features.is_finite() {
            return Err(Error::InvalidInput("non-finite feature".into()));
        }
        Ok(Self {
            features,
            labels,
            n_classes,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            name: self.name.clone(),
        }
    }

    /// Samples `[start, end)`.
    pub fn range(&self, start: usize, end: usize) -> Dataset {
        Dataset {
            features: self.features.slice_rows(start, end),
            labels: self.labels[start..end].to_vec(),
            n_classes: self.n_classes,
            name: self.name.clone(),
        }
    }
}
