//! A graph of neurons plus a softmax readout, trained by local objectives only.

mod checkpoint;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};

use crate::data::{fuse_neutral, FusedBatch, FusionMode};
use crate::error::{param, shape, Error, Result};
use crate::graph::Topology;
use crate::neuron::{
    ff_loss_and_grad_rows, forward_leading, forward_owned, neuron_step, ForwardCache, NeuronParams,
};
use crate::numerics::{
    adam_step, argmax, softmax_cross_entropy, AdamConfig, AdamState, Matrix, RngState, SoftmaxCe,
};

/// Shape and optimizer settings for [`CyclicNet::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    /// Width of the fused input fed to every neuron.
    pub base_dim: usize,
    pub d_out: usize,
    pub n_classes: usize,
    pub theta: f64,
    /// Propagation steps per iteration (T).
    pub steps: usize,
    pub fusion: FusionMode,
    pub adam: AdamConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CyclicNet {
    pub topology: Topology,
    pub neurons: Vec<NeuronParams>,
    /// `(n_classes × Σ d_out)`; columns follow ascending neuron index.
    pub readout_w: Matrix,
    pub readout_adam: AdamState,
    pub base_dim: usize,
    pub steps: usize,
    pub n_classes: usize,
    pub fusion: FusionMode,
}

/// Per-neuron outputs of the three input streams after some propagation step.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationState {
    pub pos: Vec<Matrix>,
    pub neg: Vec<Matrix>,
    pub neu: Vec<Matrix>,
}

impl PropagationState {
    /// All-zero outputs, the state before the first step.
    pub fn zeros(net: &CyclicNet, batch: usize) -> Self {
        let zeros: Vec<Matrix> = net
            .neurons
            .iter()
            .map(|n| Matrix::zeros(batch, n.d_out()))
            .collect();
        Self {
            pos: zeros.clone(),
            neg: zeros.clone(),
            neu: zeros,
        }
    }
}

/// Which parameter groups a training iteration may update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Freeze {
    pub neurons: bool,
    pub readout: bool,
}

/// Losses and readout accuracy of one [`CyclicNet::train_iteration`].
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    /// Per-neuron local loss, averaged over the propagation steps.
    pub neuron_losses: Vec<f64>,
    pub readout_loss: f64,
    /// Training-batch rows the readout classified correctly (before its update).
    pub readout_correct: usize,
}

impl CyclicNet {
    /// Resolves every neuron's input width from the topology and draws initial
    /// weights from `rng`. The readout starts at zero.
    pub fn build(topology: Topology, cfg: &NetConfig, rng: &mut RngState) -> Result<Self> {
        if cfg.steps == 0 {
            return Err(param("propagation steps must be at least 1"));
        }
        if cfg.d_out == 0 || cfg.base_dim == 0 {
            return Err(param("d_out and base_dim must be positive"));
        }
        if cfg.n_classes < 2 {
            return Err(param("need at least two classes"));
        }
        let n = topology.n_neurons();
        let mut neurons = Vec::with_capacity(n);
        for j in 0..n {
            let d_in = cfg.base_dim + topology.predecessors(j)?.len() * cfg.d_out;
            neurons.push(NeuronParams::new(
                d_in, cfg.d_out, cfg.theta, cfg.adam, rng,
            )?);
        }
        let readout_cols = n * cfg.d_out;
        Ok(Self {
            topology,
            neurons,
            readout_w: Matrix::zeros(cfg.n_classes, readout_cols),
            readout_adam: AdamState::new(cfg.n_classes, readout_cols, cfg.adam),
            base_dim: cfg.base_dim,
            steps: cfg.steps,
            n_classes: cfg.n_classes,
            fusion: cfg.fusion,
        })
    }

    /// Checks the width rules tying neurons, topology and readout together.
    pub fn validate(&self) -> Result<()> {
        let n = self.topology.n_neurons();
        if self.neurons.len() != n {
            return Err(Error::Consistency(format!(
                "{} neurons for a {n}-neuron topology",
                self.neurons.len()
            )));
        }
        for j in 0..n {
            let expected = self.base_dim
                + self
                    .topology
                    .predecessors(j)?
                    .iter()
                    .map(|&i| self.neurons[i].d_out())
                    .sum::<usize>();
            if self.neurons[j].d_in() != expected {
                return Err(Error::Consistency(format!(
                    "neuron {j} has d_in {}, topology implies {expected}",
                    self.neurons[j].d_in()
                )));
            }
        }
        let cols: usize = self.neurons.iter().map(NeuronParams::d_out).sum();
        if self.readout_w.shape() != (self.n_classes, cols) {
            return Err(Error::Consistency(format!(
                "readout is {:?}, expected ({}, {cols})",
                self.readout_w.shape(),
                self.n_classes
            )));
        }
        Ok(())
    }

    /// Width of the raw (unfused) feature rows this network accepts.
    pub fn raw_dim(&self) -> usize {
        match self.fusion {
            FusionMode::Concat => self.base_dim - self.n_classes,
            FusionMode::Overlay => self.base_dim,
        }
    }

    pub fn d_in(&self, j: usize) -> usize {
        self.neurons[j].d_in()
    }

    /// Rounds all parameters to `f32`, the precision checkpoints store.
    pub fn round_to_storage_precision(&mut self) {
        for n in &mut self.neurons {
            n.w.round_to_f32();
            n.theta = n.theta as f32 as f64;
        }
        self.readout_w.round_to_f32();
    }

    fn neuron_input(&self, j: usize, fused: &Matrix, prev: &[Matrix]) -> Result<Matrix> {
        let mut parts = vec![fused];
        for &i in self.topology.predecessors(j)? {
            parts.push(&prev[i]);
        }
        Matrix::hconcat(&parts)
    }

    /// One synchronous step for a single stream, visiting neurons in `order`.
    /// Every neuron reads only `prev`, so the visiting order cannot matter.
    /// `prev = None` is the all-zero state.
    fn step_stream_ordered(
        &self,
        fused: &Matrix,
        prev: Option<&[Matrix]>,
        order: &[usize],
    ) -> Result<Vec<ForwardCache>> {
        if fused.cols() != self.base_dim {
            return Err(shape(format!(
                "fused input has {} columns, network expects {}",
                fused.cols(),
                self.base_dim
            )));
        }
        if let Some(prev) = prev {
            if prev.len() != self.neurons.len()
                || prev
                    .iter()
                    .zip(&self.neurons)
                    .any(|(m, n)| m.shape() != (fused.rows(), n.d_out()))
            {
                return Err(shape("propagation state does not match network and batch"));
            }
        }
        let mut caches: Vec<Option<ForwardCache>> = vec![None; self.neurons.len()];
        for &j in order {
            let cache = match prev {
                Some(prev) => forward_owned(&self.neurons[j], self.neuron_input(j, fused, prev)?)?,
                None => forward_leading(&self.neurons[j], fused.clone())?,
            };
            caches[j] = Some(cache);
        }
        caches
            .into_iter()
            .map(|c| c.ok_or_else(|| param("visiting order skipped a neuron")))
            .collect()
    }

    fn step_stream(&self, fused: &Matrix, prev: Option<&[Matrix]>) -> Result<Vec<ForwardCache>> {
        let order: Vec<usize> = (0..self.neurons.len()).collect();
        self.step_stream_ordered(fused, prev, &order)
    }

    /// Synchronous propagation of all three streams: neuron `j` sees
    /// `[fused | h_prev(i) for i in predecessors(j)]`.
    pub fn propagate_step(
        &self,
        state: &PropagationState,
        fused: &FusedBatch,
    ) -> Result<PropagationState> {
        let outputs = |caches: Vec<ForwardCache>| caches.into_iter().map(|c| c.output).collect();
        Ok(PropagationState {
            pos: outputs(self.step_stream(&fused.h_pos, Some(&state.pos))?),
            neg: outputs(self.step_stream(&fused.h_neg, Some(&state.neg))?),
            neu: outputs(self.step_stream(&fused.h_neu, Some(&state.neu))?),
        })
    }

    /// Neutral-stream outputs after `steps` propagation steps from zero state.
    pub fn propagate_neutral(&self, fused_neu: &Matrix) -> Result<Vec<Matrix>> {
        let mut outputs: Option<Vec<Matrix>> = None;
        for _ in 0..self.steps {
            let caches = self.step_stream(fused_neu, outputs.as_deref())?;
            outputs = Some(caches.into_iter().map(|c| c.output).collect());
        }
        Ok(outputs.unwrap_or_else(|| {
            self.neurons
                .iter()
                .map(|n| Matrix::zeros(fused_neu.rows(), n.d_out()))
                .collect()
        }))
    }

    /// One training iteration on a fused batch.
    ///
    /// Runs `steps` rounds of: propagate all three streams with the current
    /// weights, then update every neuron from the positive/negative inputs of that
    /// round. The outputs carried into the next round are the pre-update ones.
    /// Afterwards the readout is trained on the neutral outputs of the last round.
    pub fn train_iteration(
        &mut self,
        fused: &FusedBatch,
        freeze: Freeze,
    ) -> Result<IterationReport> {
        let batch = fused.len();
        if fused.h_neg.rows() != batch || fused.h_neu.rows() != batch || fused.h_pos.rows() != batch
        {
            return Err(shape("fused streams have different batch sizes"));
        }
        // Rows [0, B) carry the positive stream, [B, 2B) the negative and
        // [2B, 3B) the neutral one, so each neuron does one product per step.
        let stacked = Matrix::vstack(&[&fused.h_pos, &fused.h_neg, &fused.h_neu])?;
        let mut prev: Option<Vec<Matrix>> = None;
        let mut loss_sums = vec![0.0; self.neurons.len()];
        for _ in 0..self.steps {
            let caches = self.step_stream(&stacked, prev.as_deref())?;
            for ((neuron, cache), sum) in self.neurons.iter_mut().zip(&caches).zip(&mut loss_sums) {
                let (loss, grad) =
                    ff_loss_and_grad_rows(neuron, cache, batch, batch, !freeze.neurons)?;
                *sum += loss;
                if let Some(grad) = grad {
                    neuron_step(neuron, &grad)?;
                }
            }
            prev = Some(caches.into_iter().map(|c| c.output).collect());
        }
        let prev = prev.unwrap_or_else(|| {
            self.neurons
                .iter()
                .map(|n| Matrix::zeros(3 * batch, n.d_out()))
                .collect()
        });
        let neutral: Vec<Matrix> = prev
            .iter()
            .map(|m| m.slice_rows(2 * batch, 3 * batch))
            .collect();
        let readout = self.readout_forward_loss_grad(&neutral, &fused.true_labels)?;
        let readout_correct = readout
            .probs
            .row_iter()
            .zip(&fused.true_labels)
            .filter(|(row, &y)| argmax(row) == y)
            .count();
        if !freeze.readout {
            adam_step(&mut self.readout_w, &readout.grad, &mut self.readout_adam)?;
        }
        Ok(IterationReport {
            neuron_losses: loss_sums.iter().map(|s| s / self.steps as f64).collect(),
            readout_loss: readout.loss,
            readout_correct,
        })
    }

    fn readout_input(&self, outputs: &[Matrix]) -> Result<Matrix> {
        if outputs.len() != self.neurons.len() {
            return Err(shape(format!(
                "{} neuron outputs for {} neurons",
                outputs.len(),
                self.neurons.len()
            )));
        }
        let parts: Vec<&Matrix> = outputs.iter().collect();
        let input = Matrix::hconcat(&parts)?;
        if input.cols() != self.readout_w.cols() {
            return Err(shape(format!(
                "readout expects {} columns, got {}",
                self.readout_w.cols(),
                input.cols()
            )));
        }
        Ok(input)
    }

    /// Readout logits from final neutral outputs.
    pub fn readout_logits(&self, outputs: &[Matrix]) -> Result<Matrix> {
        self.readout_input(outputs)?
            .matmul_transposed(&self.readout_w)
    }

    /// Softmax probabilities, mean cross-entropy and its gradient with respect to
    /// the readout weights. Neuron outputs are treated as constants.
    pub fn readout_forward_loss_grad(
        &self,
        neu_outputs: &[Matrix],
        labels: &[usize],
    ) -> Result<ReadoutResult> {
        let input = self.readout_input(neu_outputs)?;
        if labels.len() != input.rows() {
            return Err(shape(format!(
                "{} labels for {} rows",
                labels.len(),
                input.rows()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y >= self.n_classes) {
            return Err(param(format!("label {bad} out of range")));
        }
        let logits = input.matmul_transposed(&self.readout_w)?;
        let SoftmaxCe { probs, loss, delta } = softmax_cross_entropy(&logits, labels)?;
        let grad = delta.transpose_matmul(&input)?;
        Ok(ReadoutResult { probs, loss, grad })
    }

    /// Class predictions for raw feature rows: neutral fusion, `steps` propagation
    /// steps from zero state, readout argmax (ties go to the lowest class).
    pub fn predict(&self, features: &Matrix) -> Result<Vec<usize>> {
        Ok(self
            .predict_logits(features)?
            .row_iter()
            .map(argmax)
            .collect())
    }

    pub fn predict_logits(&self, features: &Matrix) -> Result<Matrix> {
        if features.cols() != self.raw_dim() {
            return Err(shape(format!(
                "network expects {} raw features, got {}",
                self.raw_dim(),
                features.cols()
            )));
        }
        const CHUNK: usize = 500;
        let mut rows = Vec::with_capacity(features.rows() * self.n_classes);
        let mut start = 0;
        while start < features.rows() {
            let end = (start + CHUNK).min(features.rows());
            let neutral = fuse_neutral(
                &features.slice_rows(start, end),
                self.n_classes,
                self.fusion,
            )?;
            let outputs = self.propagate_neutral(&neutral)?;
            rows.extend(self.readout_logits(&outputs)?.into_vec());
            start = end;
        }
        Matrix::new(features.rows(), self.n_classes, rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutResult {
    /// Softmax probabilities, one row per sample.
    pub probs: Matrix,
    pub loss: f64,
    pub grad: Matrix,
}
