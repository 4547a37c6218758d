use crate::error::{shape, Error, Result};

use super::Matrix;

/// Lower bound on the norm used by [`l2_normalize`]; inputs shorter than this are
/// divided by it instead, so the zero vector maps to itself.
pub const NORM_EPSILON: f64 = 1e-8;

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// Numerically stable `1 / (1 + e^{-x})`.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow; equals `-ln(logistic(-x))`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn l2_normalize(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry in vector".into()));
    }
    let norm = v
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(NORM_EPSILON);
    Ok(v.iter().map(|x| x / norm).collect())
}

/// Normalizes every row in place with the same guard as [`l2_normalize`].
pub fn l2_normalize_rows(m: &mut Matrix) {
    for i in 0..m.rows() {
        let row = m.row_mut(i);
        let norm = row
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
            .max(NORM_EPSILON);
        for x in row {
            *x /= norm;
        }
    }
}

pub fn softmax_stable(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::InvalidInput("softmax of an empty vector".into()));
    }
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite logit".into()));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Row-wise softmax of `logits`, mean cross-entropy against `labels`, and the
/// gradient of that mean with respect to the logits.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<SoftmaxCe> {
    if labels.len() != logits.rows() {
        return Err(shape(format!(
            "{} labels for {} rows",
            labels.len(),
            logits.rows()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&y| y >= logits.cols()) {
        return Err(Error::InvalidInput(format!("label {bad} out of range")));
    }
    let batch = labels.len().max(1) as f64;
    let mut probs = Matrix::zeros(logits.rows(), logits.cols());
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let row = logits.row(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|z| (z - max).exp()).sum();
        // -ln softmax(z)_y = logsumexp(z) - z_y
        loss += max + sum.ln() - row[y];
        for (p, z) in probs.row_mut(i).iter_mut().zip(row) {
            *p = (z - max).exp() / sum;
        }
    }
    let mut delta = probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        let r = delta.row_mut(i);
        r[y] -= 1.0;
        for x in r.iter_mut() {
            *x /= batch;
        }
    }
    Ok(SoftmaxCe {
        probs,
        loss: loss / batch,
        delta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxCe {
    pub probs: Matrix,
    pub loss: f64,
    /// d loss / d logits.
    pub delta: Matrix,
}
