use crate::error::{shape, Error, Result};

use super::Matrix;

/// Hyper-parameters shared by every Adam instance in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Coupled L2 penalty: `weight_decay · params` is added to the gradient.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64, weight_decay: f64) -> Self {
        Self {
            lr,
            weight_decay,
            ..Self::default()
        }
    }
}

/// Moment estimates for one parameter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Matrix,
    pub v: Matrix,
    pub t: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(rows: usize, cols: usize, config: AdamConfig) -> Self {
        Self {
            m: Matrix::zeros(rows, cols),
            v: Matrix::zeros(rows, cols),
            t: 0,
            config,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut Matrix, grad: &Matrix, state: &mut AdamState) -> Result<()> {
    if params.shape() != grad.shape()
        || params.shape() != state.m.shape()
        || params.shape() != state.v.shape()
    {
        return Err(shape(format!(
            "adam: params {:?}, grad {:?}, moments {:?}",
            params.shape(),
            grad.shape(),
            state.m.shape()
        )));
    }
    if !grad.is_finite() {
        return Err(Error::InvalidInput("adam: non-finite gradient".into()));
    }
    let AdamConfig {
        lr,
        beta1,
        beta2,
        eps,
        weight_decay,
    } = state.config;
    state.t += 1;
    let t = state.t as f64;
    let inv_bias1 = 1.0 / (1.0 - beta1.powf(t));
    let inv_bias2 = 1.0 / (1.0 - beta2.powf(t));

    let m = state.m.as_mut_slice();
    let v = state.v.as_mut_slice();
    for (((p, &g), m), v) in params
        .as_mut_slice()
        .iter_mut()
        .zip(grad.as_slice())
        .zip(m.iter_mut())
        .zip(v.iter_mut())
    {
        let g = g + weight_decay * *p;
        *m = flush_subnormal(beta1 * *m + (1.0 - beta1) * g);
        *v = flush_subnormal(beta2 * *v + (1.0 - beta2) * g * g);
        let m_hat = *m * inv_bias1;
        let v_hat = *v * inv_bias2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// Moments of weights whose gradient stays zero (dead ReLU units) decay
/// geometrically into subnormals, which are very slow on x86.
#[inline]
fn flush_subnormal(x: f64) -> f64 {
    if x.abs() < f64::MIN_POSITIVE {
        0.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(x: f64) -> Matrix {
        Matrix::new(1, 1, vec![x]).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = Matrix::from_fn(2, 3, |i, j| (i + j) as f64 - 1.5);
        let before = p.clone();
        let mut s = AdamState::new(2, 3, AdamConfig::default());
        adam_step(&mut p, &Matrix::zeros(2, 3), &mut s).unwrap();
        assert_eq!(p, before);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn decaying_moments_never_go_subnormal() {
        let mut p = scalar(1.0);
        let mut s = AdamState::new(1, 1, AdamConfig::default());
        adam_step(&mut p, &scalar(1.0), &mut s).unwrap();
        for _ in 0..10_000 {
            adam_step(&mut p, &scalar(0.0), &mut s).unwrap();
            let m = s.m.get(0, 0);
            assert!(m == 0.0 || m.is_normal());
        }
        assert_eq!(s.m.get(0, 0), 0.0);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m̂ = v̂ = 1 after bias correction, so the step is lr · 1 / (1 + eps).
        let mut p = scalar(0.0);
        let mut s = AdamState::new(1, 1, AdamConfig::with_lr(0.001, 0.0));
        adam_step(&mut p, &scalar(1.0), &mut s).unwrap();
        let expected = -0.001 / (1.0 + 1e-8);
        assert!((p.get(0, 0) - expected).abs() < 1e-15);
    }

    #[test]
    fn coupled_weight_decay_enters_gradient() {
        // grad 0 but params 2 with decay 0.5: effective gradient 1, same step as above.
        let mut p = scalar(2.0);
        let mut s = AdamState::new(1, 1, AdamConfig::with_lr(0.01, 0.5));
        adam_step(&mut p, &scalar(0.0), &mut s).unwrap();
        assert!((p.get(0, 0) - (2.0 - 0.01 / (1.0 + 1e-8))).abs() < 1e-15);
    }

    #[test]
    fn deterministic() {
        let g = Matrix::from_fn(3, 3, |i, j| (i as f64 - j as f64) * 0.3);
        let run = || {
            let mut p = Matrix::from_fn(3, 3, |i, j| (i * j) as f64 * 0.1);
            let mut s = AdamState::new(3, 3, AdamConfig::default());
            adam_step(&mut p, &g, &mut s).unwrap();
            adam_step(&mut p, &g, &mut s).unwrap();
            (p, s)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn errors() {
        let mut p = Matrix::zeros(2, 2);
        let mut s = AdamState::new(2, 2, AdamConfig::default());
        assert!(matches!(
            adam_step(&mut p, &Matrix::zeros(2, 3), &mut s),
            Err(Error::Shape(_))
        ));
        let bad = Matrix::from_fn(2, 2, |_, _| f64::NAN);
        assert!(matches!(
            adam_step(&mut p, &bad, &mut s),
            Err(Error::InvalidInput(_))
        ));
        assert_eq!(s.t, 0);
    }

    proptest! {
        #[test]
        fn zero_lr_is_identity(
            params in prop::collection::vec(-10.0f64..10.0, 6),
            grad in prop::collection::vec(-10.0f64..10.0, 6),
            decay in 0.0f64..0.1,
        ) {
            let mut p = Matrix::new(2, 3, params).unwrap();
            let before = p.clone();
            let mut s = AdamState::new(2, 3, AdamConfig::with_lr(0.0, decay));
            let g = Matrix::new(2, 3, grad).unwrap();
            adam_step(&mut p, &g, &mut s).unwrap();
            adam_step(&mut p, &g, &mut s).unwrap();
            prop_assert_eq!(p, before);
            prop_assert!(s.v.as_slice().iter().all(|&x| x >= 0.0));
        }
    }
}
