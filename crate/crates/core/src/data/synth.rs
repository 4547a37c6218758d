use rand_distr::{Distribution, StandardNormal};

use super::Dataset;
use crate::error::{param, Result};
use crate::numerics::{Matrix, RngState};

/// Gaussian blobs: class `c` is `N(separation · e_c, I)` in `dim` dimensions.
/// Samples are interleaved by class (sample `i` has label `i % n_classes`).
pub fn synth_blobs(
    n_per_class: usize,
    dim: usize,
    n_classes: usize,
    separation: f64,
    rng: &mut RngState,
) -> Result<Dataset> {
    if n_classes > dim {
        return Err(param(format!(
            "{n_classes} classes need at least as many dimensions (got {dim})"
        )));
    }
    if n_classes == 0 {
        return Err(param("synth_blobs needs at least one class"));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(param(format!(
            "separation must be finite and >= 0, got {separation}"
        )));
    }
    let n = n_per_class * n_classes;
    let labels: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
    let mut data = Vec::with_capacity(n * dim);
    for &c in &labels {
        for j in 0..dim {
            let noise: f64 = StandardNormal.sample(rng);
            data.push(noise + if j == c { separation } else { 0.0 });
        }
    }
    Dataset::new(
        format!("blobs-{n_classes}x{dim}-sep{separation}"),
        Matrix::new(n, dim, data)?,
        labels,
        n_classes,
    )
}
