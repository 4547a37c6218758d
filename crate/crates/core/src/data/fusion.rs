use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{param, shape, Result};
use crate::numerics::{Matrix, RngState};

/// How a label vector is fused into a feature row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FusionMode {
    /// Append the label vector: fused width is `dim + n_classes`.
    Concat,
    /// Overwrite the first `n_classes` features (pixel overlay); width stays `dim`.
    Overlay,
}

impl FusionMode {
    pub fn fused_dim(self, dim: usize, n_classes: usize) -> Result<usize> {
        match self {
            FusionMode::Concat => Ok(dim + n_classes),
            FusionMode::Overlay if n_classes > dim => Err(param(format!(
                "overlay fusion needs dim >= n_classes (dim {dim}, {n_classes} classes)"
            ))),
            FusionMode::Overlay => Ok(dim),
        }
    }

    pub fn code(self) -> u32 {
        match self {
            FusionMode::Concat => 0,
            FusionMode::Overlay => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(FusionMode::Concat),
            1 => Some(FusionMode::Overlay),
            _ => None,
        }
    }
}

impl fmt::Display for FusionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FusionMode::Concat => "concat",
            FusionMode::Overlay => "overlay",
        })
    }
}

impl FromStr for FusionMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat" => Ok(FusionMode::Concat),
            "overlay" => Ok(FusionMode::Overlay),
            other => Err(param(format!(
                "unknown fusion {other:?} (expected concat or overlay)"
            ))),
        }
    }
}

/// The same samples fused with their true label, a random false label, and the
/// uniform (neutral) label vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedBatch {
    pub h_pos: Matrix,
    pub h_neg: Matrix,
    pub h_neu: Matrix,
    pub true_labels: Vec<usize>,
    pub neg_labels: Vec<usize>,
}

impl FusedBatch {
    pub fn len(&self) -> usize {
        self.true_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_labels.is_empty()
    }

    pub fn fused_dim(&self) -> usize {
        self.h_pos.cols()
    }
}

fn check(features: &Matrix, n_classes: usize, mode: FusionMode) -> Result<usize> {
    if n_classes < 2 {
        return Err(param(format!(
            "fusion needs at least 2 classes, got {n_classes}"
        )));
    }
    mode.fused_dim(features.cols(), n_classes)
}

/// Writes `label_row` into a copy of `features` according to `mode`.
fn fuse_rows(
    features: &Matrix,
    n_classes: usize,
    mode: FusionMode,
    fused_dim: usize,
    mut label_row: impl FnMut(usize, &mut [f64]),
) -> Matrix {
    let dim = features.cols();
    let mut out = Matrix::zeros(features.rows(), fused_dim);
    for i in 0..features.rows() {
        let row = out.row_mut(i);
        row[..dim].copy_from_slice(features.row(i));
        let label_slot = match mode {
            FusionMode::Concat => &mut row[dim..],
            FusionMode::Overlay => &mut row[..n_classes],
        };
        label_slot.fill(0.0);
        label_row(i, label_slot);
    }
    out
}

/// Builds positive, negative and neutral inputs for a batch. Negative labels are
/// drawn uniformly from the `n_classes - 1` wrong classes on every call.
pub fn fuse_inputs(
    features: &Matrix,
    labels: &[usize],
    n_classes: usize,
    mode: FusionMode,
    rng: &mut RngState,
) -> Result<FusedBatch> {
    let fused_dim = check(features, n_classes, mode)?;
    if labels.len() != features.rows() {
        return Err(shape(format!(
            "{} labels for {} rows",
            labels.len(),
            features.rows()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(param(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    let neg_labels: Vec<usize> = labels
        .iter()
        .map(|&y| {
            let r = rng.random_range(0..n_classes - 1);
            if r >= y {
                r + 1
            } else {
                r
            }
        })
        .collect();
    let h_pos = fuse_rows(features, n_classes, mode, fused_dim, |i, slot| {
        slot[labels[i]] = 1.0
    });
    let h_neg = fuse_rows(features, n_classes, mode, fused_dim, |i, slot| {
        slot[neg_labels[i]] = 1.0
    });
    let h_neu = fuse_neutral(features, n_classes, mode)?;
    Ok(FusedBatch {
        h_pos,
        h_neg,
        h_neu,
        true_labels: labels.to_vec(),
        neg_labels,
    })
}

/// Neutral fusion only: every label entry is `1 / n_classes`. Used at inference.
pub fn fuse_neutral(features: &Matrix, n_classes: usize, mode: FusionMode) -> Result<Matrix> {
    let fused_dim = check(features, n_classes, mode)?;
    let uniform = 1.0 / n_classes as f64;
    Ok(fuse_rows(
        features,
        n_classes,
        mode,
        fused_dim,
        |_, slot| slot.fill(uniform),
    ))
}
