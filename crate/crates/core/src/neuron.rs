//! A single computational neuron and its local forward-forward objective.
//!
//! Forward: every input row is L2-normalized, multiplied by `Wᵀ`, then passed
//! through ReLU. The goodness of an output row `h` is `logistic(Σ h² − θ·d_out)`,
//! read as the probability that the row came from a positive sample. The local
//! loss is binary cross-entropy over a positive and a negative batch:
//!
//! ```text
//! L = mean_b [ -ln p(h⁺_b) - ln(1 - p(h⁻_b)) ]
//! ```
//!
//! evaluated as `softplus(-s⁺) + softplus(s⁻)` with `s = Σh² − θ·d_out`, which is
//! finite everywhere and keeps its gradient in the saturated regime. The
//! normalized input is a constant with respect to `W`, so the gradient only
//! passes through ReLU and the linear map.

use rand::Rng;

use crate::error::{param, shape, Result};
use crate::numerics::{
    adam_step, l2_normalize_rows, logistic, softplus, AdamConfig, AdamState, Matrix, RngState,
};

#[derive(Debug, Clone, PartialEq)]
pub struct NeuronParams {
    /// `(d_out × d_in)` weights.
    pub w: Matrix,
    pub adam: AdamState,
    /// Goodness threshold per output unit.
    pub theta: f64,
}

impl NeuronParams {
    /// Weights drawn uniformly from `[-1/√d_in, 1/√d_in]`.
    pub fn new(
        d_in: usize,
        d_out: usize,
        theta: f64,
        adam: AdamConfig,
        rng: &mut RngState,
    ) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(param(format!(
                "neuron dims must be positive (got {d_in}->{d_out})"
            )));
        }
        let bound = 1.0 / (d_in as f64).sqrt();
        let w = Matrix::from_fn(d_out, d_in, |_, _| rng.random_range(-bound..bound));
        Self::from_weights(w, theta, adam)
    }

    pub fn from_weights(w: Matrix, theta: f64, adam: AdamConfig) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(param(format!("theta must be finite and >= 0, got {theta}")));
        }
        let (rows, cols) = w.shape();
        Ok(Self {
            w,
            adam: AdamState::new(rows, cols, adam),
            theta,
        })
    }

    pub fn d_in(&self) -> usize {
        self.w.cols()
    }

    pub fn d_out(&self) -> usize {
        self.w.rows()
    }
}

/// Normalized input and output of one forward pass; enough to form the gradient
/// without recomputing anything.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    /// Normalized input. May be narrower than `d_in`; missing trailing columns are zero.
    pub normalized: Matrix,
    pub output: Matrix,
}

pub fn forward_cached(p: &NeuronParams, h_in: &Matrix) -> Result<ForwardCache> {
    forward_owned(p, h_in.clone())
}

/// [`forward_cached`] that normalizes `h_in` in place instead of copying it.
pub(crate) fn forward_owned(p: &NeuronParams, h_in: Matrix) -> Result<ForwardCache> {
    if h_in.cols() != p.d_in() {
        return Err(shape(format!(
            "neuron expects {} input columns, got {}",
            p.d_in(),
            h_in.cols()
        )));
    }
    forward_leading(p, h_in)
}

/// Forward pass for an input whose columns past `h_in.cols()` are all zero,
/// skipping them in both the norm and the product.
pub(crate) fn forward_leading(p: &NeuronParams, mut h_in: Matrix) -> Result<ForwardCache> {
    l2_normalize_rows(&mut h_in);
    let mut output = h_in.matmul_transposed_leading(&p.w)?;
    for x in output.as_mut_slice() {
        *x = x.max(0.0);
    }
    Ok(ForwardCache {
        normalized: h_in,
        output,
    })
}

/// `ReLU(normalize(h_in) · Wᵀ)`, one row per sample.
pub fn neuron_forward(p: &NeuronParams, h_in: &Matrix) -> Result<Matrix> {
    Ok(forward_cached(p, h_in)?.output)
}

/// Per-row `Σ h²  − θ · d`, the logit behind [`goodness`].
fn goodness_logits(h: &Matrix, theta: f64) -> Vec<f64> {
    let threshold = theta * h.cols() as f64;
    h.row_iter()
        .map(|row| row.iter().map(|x| x * x).sum::<f64>() - threshold)
        .collect()
}

pub fn goodness(h: &Matrix, theta: f64) -> Vec<f64> {
    goodness_logits(h, theta)
        .into_iter()
        .map(logistic)
        .collect()
}

/// Loss of already computed positive and negative output batches.
pub fn ff_loss_from_outputs(out_pos: &Matrix, out_neg: &Matrix, theta: f64) -> f64 {
    let batch = out_pos.rows().max(1) as f64;
    let pos: f64 = goodness_logits(out_pos, theta)
        .into_iter()
        .map(|s| softplus(-s))
        .sum();
    let neg: f64 = goodness_logits(out_neg, theta)
        .into_iter()
        .map(softplus)
        .sum();
    (pos + neg) / batch
}

/// Loss over a forward cache whose first `n_pos` rows are positive samples and
/// next `n_neg` rows negative ones; later rows are ignored. With `with_grad` also
/// returns `∂L/∂W`. The loss is averaged over `max(n_pos, n_neg)` rows.
pub(crate) fn ff_loss_and_grad_rows(
    p: &NeuronParams,
    cache: &ForwardCache,
    n_pos: usize,
    n_neg: usize,
    with_grad: bool,
) -> Result<(f64, Option<Matrix>)> {
    let used = n_pos + n_neg;
    if used > cache.output.rows() {
        return Err(shape(format!(
            "{used} rows requested from a cache of {}",
            cache.output.rows()
        )));
    }
    let batch = n_pos.max(n_neg).max(1) as f64;
    let threshold = p.theta * p.d_out() as f64;
    let mut dz = if with_grad {
        Matrix::zeros(used, p.d_out())
    } else {
        Matrix::zeros(0, 0)
    };
    let mut loss = 0.0;
    // dL/ds⁺ = σ(s⁺) − 1, dL/ds⁻ = σ(s⁻); ds/dz = 2h (ReLU's mask is already in h).
    for i in 0..used {
        let h = cache.output.row(i);
        let s = h.iter().map(|x| x * x).sum::<f64>() - threshold;
        let (term, ds) = if i < n_pos {
            (softplus(-s), logistic(s) - 1.0)
        } else {
            (softplus(s), logistic(s))
        };
        loss += term;
        if with_grad {
            let scale = 2.0 * ds / batch;
            for (d, x) in dz.row_mut(i).iter_mut().zip(h) {
                *d = x * scale;
            }
        }
    }
    let grad = if with_grad {
        let mut grad = Matrix::zeros(p.d_out(), p.d_in());
        dz.transpose_matmul_prefix_into(&cache.normalized, used, &mut grad)?;
        Some(grad)
    } else {
        None
    };
    Ok((loss / batch, grad))
}

/// Loss and `∂L/∂W` from the forward caches of the positive and negative batches.
pub fn ff_loss_and_grad_cached(
    p: &NeuronParams,
    pos: &ForwardCache,
    neg: &ForwardCache,
) -> Result<(f64, Matrix)> {
    if pos.output.rows() != neg.output.rows() {
        return Err(shape(format!(
            "positive batch has {} rows, negative {}",
            pos.output.rows(),
            neg.output.rows()
        )));
    }
    let stacked = ForwardCache {
        normalized: Matrix::vstack(&[&pos.normalized, &neg.normalized])?,
        output: Matrix::vstack(&[&pos.output, &neg.output])?,
    };
    let b = pos.output.rows();
    let (loss, grad) = ff_loss_and_grad_rows(p, &stacked, b, b, true)?;
    Ok((loss, grad.expect("gradient requested")))
}

pub fn ff_loss_and_grad(
    p: &NeuronParams,
    h_in_pos: &Matrix,
    h_in_neg: &Matrix,
) -> Result<(f64, Matrix)> {
    if h_in_pos.rows() != h_in_neg.rows() {
        return Err(shape(format!(
            "positive batch has {} rows, negative {}",
            h_in_pos.rows(),
            h_in_neg.rows()
        )));
    }
    let b = h_in_pos.rows();
    let cache = forward_cached(p, &Matrix::vstack(&[h_in_pos, h_in_neg])?)?;
    let (loss, grad) = ff_loss_and_grad_rows(p, &cache, b, b, true)?;
    Ok((loss, grad.expect("gradient requested")))
}

/// Applies one Adam update to the neuron's weights.
pub fn neuron_step(p: &mut NeuronParams, grad: &Matrix) -> Result<()> {
    adam_step(&mut p.w, grad, &mut p.adam)
}
