//! The backprop comparison model: an MLP of ReLU hidden layers and a softmax
//! head, trained end to end on raw features.

use rand::Rng;

use crate::error::{format_err, param, shape, Result};
use crate::numerics::{
    adam_step, argmax, relu, softmax_cross_entropy, AdamConfig, AdamState, Matrix, RngState,
};

pub const BP_HIDDEN_LAYERS: usize = 4;

/// Fully connected layer `x ↦ x·Wᵀ + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `(out × in)`.
    pub w: Matrix,
    /// `(1 × out)`.
    pub b: Matrix,
    pub adam_w: AdamState,
    pub adam_b: AdamState,
}

impl Dense {
    fn new(d_in: usize, d_out: usize, adam: AdamConfig, rng: &mut RngState) -> Self {
        let bound = 1.0 / (d_in as f64).sqrt();
        Self::from_parts(
            Matrix::from_fn(d_out, d_in, |_, _| rng.random_range(-bound..bound)),
            Matrix::zeros(1, d_out),
            adam,
        )
    }

    fn from_parts(w: Matrix, b: Matrix, adam: AdamConfig) -> Self {
        let (rows, cols) = w.shape();
        let adam_b = AdamState::new(1, rows, adam);
        Self {
            adam_w: AdamState::new(rows, cols, adam),
            adam_b,
            w,
            b,
        }
    }

    fn forward(&self, x: &Matrix) -> Result<Matrix> {
        let mut z = x.matmul_transposed(&self.w)?;
        let b = self.b.as_slice();
        for i in 0..z.rows() {
            for (v, bias) in z.row_mut(i).iter_mut().zip(b) {
                *v += bias;
            }
        }
        Ok(z)
    }
}

/// Gradients for one [`Dense`] layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    pub w: Matrix,
    pub b: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpChain {
    /// Hidden layers followed by the softmax head.
    pub layers: Vec<Dense>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpStep {
    pub loss: f64,
    pub grads: Vec<DenseGrad>,
    /// Rows classified correctly before the update.
    pub correct: usize,
}

impl BpChain {
    pub fn new(
        raw_dim: usize,
        width: usize,
        hidden: usize,
        n_classes: usize,
        adam: AdamConfig,
        rng: &mut RngState,
    ) -> Result<Self> {
        if raw_dim == 0 || width == 0 || n_classes < 2 {
            return Err(param(
                "bp-chain needs positive widths and at least two classes",
            ));
        }
        let mut layers = Vec::with_capacity(hidden + 1);
        let mut d_in = raw_dim;
        for _ in 0..hidden {
            layers.push(Dense::new(d_in, width, adam, rng));
            d_in = width;
        }
        layers.push(Dense::new(d_in, n_classes, adam, rng));
        Ok(Self { layers })
    }

    pub fn raw_dim(&self) -> usize {
        self.layers[0].w.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.layers[self.layers.len() - 1].w.rows()
    }

    /// Pre-activations of every layer; the last entry is the logits.
    fn forward_all(&self, x: &Matrix) -> Result<Vec<Matrix>> {
        if x.cols() != self.raw_dim() {
            return Err(shape(format!(
                "bp-chain expects {} features, got {}",
                self.raw_dim(),
                x.cols()
            )));
        }
        let mut zs: Vec<Matrix> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let z = if l == 0 {
                layer.forward(x)?
            } else {
                layer.forward(&zs[l - 1].map(relu))?
            };
            zs.push(z);
        }
        Ok(zs)
    }

    pub fn logits(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward_all(x)?.pop().expect("at least one layer"))
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.logits(x)?.row_iter().map(argmax).collect())
    }

    /// Mean softmax cross-entropy and its exact gradient for every layer.
    pub fn loss_and_grads(&self, x: &Matrix, labels: &[usize]) -> Result<BpStep> {
        let zs = self.forward_all(x)?;
        let ce = softmax_cross_entropy(&zs[zs.len() - 1], labels)?;
        let correct = ce
            .probs
            .row_iter()
            .zip(labels)
            .filter(|(row, &y)| argmax(row) == y)
            .count();
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = ce.delta;
        for l in (0..self.layers.len()).rev() {
            let input = if l == 0 {
                x.clone()
            } else {
                zs[l - 1].map(relu)
            };
            let gw = delta.transpose_matmul(&input)?;
            let mut gb = vec![0.0; delta.cols()];
            for row in delta.row_iter() {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g += d;
                }
            }
            grads.push(DenseGrad {
                w: gw,
                b: Matrix::new(1, gb.len(), gb)?,
            });
            if l > 0 {
                let mut back = delta.matmul(&self.layers[l].w)?;
                let z = &zs[l - 1];
                for i in 0..back.rows() {
                    for (b, &zv) in back.row_mut(i).iter_mut().zip(z.row(i)) {
                        if zv <= 0.0 {
                            *b = 0.0;
                        }
                    }
                }
                delta = back;
            }
        }
        grads.reverse();
        Ok(BpStep {
            loss: ce.loss,
            grads,
            correct,
        })
    }

    pub fn apply(&mut self, grads: &[DenseGrad]) -> Result<()> {
        if grads.len() != self.layers.len() {
            return Err(shape("one gradient per layer expected"));
        }
        for (layer, g) in self.layers.iter_mut().zip(grads) {
            adam_step(&mut layer.w, &g.w, &mut layer.adam_w)?;
            adam_step(&mut layer.b, &g.b, &mut layer.adam_b)?;
        }
        Ok(())
    }

    pub fn round_to_storage_precision(&mut self) {
        for layer in &mut self.layers {
            layer.w.round_to_f32();
            layer.b.round_to_f32();
        }
    }
}

const BP_MAGIC: &[u8; 4] = b"CBP1";

/// Little-endian: `b"CBP1"`, u32 version, u32 layers, then per layer
/// u32 rows, u32 cols, f32 W[rows·cols], f32 b[rows].
pub fn write_bp_checkpoint(model: &BpChain) -> Vec<u8> {
    let mut out = BP_MAGIC.to_vec();
    let u32 = |out: &mut Vec<u8>, v: usize| out.extend((v as u32).to_le_bytes());
    u32(&mut out, 1);
    u32(&mut out, model.layers.len());
    for layer in &model.layers {
        u32(&mut out, layer.w.rows());
        u32(&mut out, layer.w.cols());
        for &x in layer.w.as_slice().iter().chain(layer.b.as_slice()) {
            out.extend((x as f32).to_le_bytes());
        }
    }
    out
}

pub fn is_bp_checkpoint(bytes: &[u8]) -> bool {
    bytes.starts_with(BP_MAGIC)
}

pub fn read_bp_checkpoint(bytes: &[u8], adam: AdamConfig) -> Result<BpChain> {
    if !is_bp_checkpoint(bytes) {
        return Err(format_err("not a CBP1 checkpoint"));
    }
    let mut rest = &bytes[4..];
    let mut take = |n: usize| -> Result<&[u8]> {
        if n > rest.len() {
            return Err(format_err("checkpoint truncated"));
        }
        let (head, tail) = rest.split_at(n);
        rest = tail;
        Ok(head)
    };
    let word = |b: &[u8]| u32::from_le_bytes(b.try_into().unwrap()) as usize;
    let floats = |b: &[u8]| -> Vec<f64> {
        b.chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect()
    };
    if word(take(4)?) != 1 {
        return Err(format_err("unsupported bp checkpoint version"));
    }
    let n_layers = word(take(4)?);
    if n_layers == 0 {
        return Err(format_err("bp checkpoint has no layers"));
    }
    let mut layers = Vec::with_capacity(n_layers.min(64));
    for _ in 0..n_layers {
        let rows = word(take(4)?);
        let cols = word(take(4)?);
        let n_w = rows
            .checked_mul(cols)
            .filter(|n| n.checked_mul(4).is_some())
            .ok_or_else(|| format_err("layer too large"))?;
        let w = Matrix::new(rows, cols, floats(take(n_w * 4)?))?;
        let b = Matrix::new(1, rows, floats(take(rows * 4)?))?;
        if let Some(prev) = layers.last().map(|l: &Dense| l.w.rows()) {
            if prev != cols {
                return Err(format_err("bp checkpoint layer widths do not chain"));
            }
        }
        layers.push(Dense::from_parts(w, b, adam));
    }
    if !rest.is_empty() {
        return Err(format_err("trailing bytes after checkpoint"));
    }
    Ok(BpChain { layers })
}

/// Smallest |pre-activation| over the hidden layers; finite differences of
/// width `h` are only trustworthy when this exceeds `h`.
pub fn min_hidden_margin(model: &BpChain, x: &Matrix) -> Result<f64> {
    let zs = model.forward_all(x)?;
    Ok(zs[..zs.len() - 1]
        .iter()
        .flat_map(|z| z.as_slice().iter().map(|v| v.abs()))
        .fold(f64::INFINITY, f64::min))
}
