//! Epoch loop with early stopping, evaluation, the backprop baseline and sweeps.

mod bp;
mod config;
mod metrics;
mod sweep;

pub use bp::{
    is_bp_checkpoint, min_hidden_margin, read_bp_checkpoint, write_bp_checkpoint, BpChain, BpStep,
    Dense, DenseGrad, BP_HIDDEN_LAYERS,
};
pub use config::{Baseline, TrainConfig, TRAIN_KEYS};
pub use metrics::{mean_std, EarlyStopping, EpochRecord, Metrics, Observation, CSV_HEADER};
pub use sweep::{summary_csv, sweep, SummaryRow, SweepOutcome, SweepRun};

use std::time::Instant;

use crate::data::{fuse_inputs, Dataset};
use crate::error::{Error, Result};
use crate::graph::generate;
use crate::network::{read_checkpoint, write_checkpoint, CyclicNet, Freeze};
use crate::numerics::{AdamConfig, Matrix, RngState, Stream};

/// Anything that maps raw feature rows to class indices.
pub trait Classifier {
    fn predict(&self, features: &Matrix) -> Result<Vec<usize>>;
}

impl Classifier for CyclicNet {
    fn predict(&self, features: &Matrix) -> Result<Vec<usize>> {
        CyclicNet::predict(self, features)
    }
}

impl Classifier for BpChain {
    fn predict(&self, features: &Matrix) -> Result<Vec<usize>> {
        BpChain::predict(self, features)
    }
}

/// Percentage of `predictions` that differ from `labels`.
pub fn error_rate(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::UndefinedMetric("error rate of an empty set".into()));
    }
    let wrong = predictions
        .iter()
        .zip(labels)
        .filter(|(p, y)| p != y)
        .count();
    Ok(100.0 * wrong as f64 / labels.len() as f64)
}

/// Test error in percent.
pub fn evaluate(model: &impl Classifier, d: &Dataset) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::UndefinedMetric(format!(
            "dataset {:?} is empty",
            d.name
        )));
    }
    error_rate(&model.predict(&d.features)?, &d.labels)
}

/// What one mini-batch update reports back to the epoch loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchStats {
    pub neuron_loss: Option<f64>,
    pub readout_loss: f64,
    pub correct: usize,
}

fn check_datasets(train: &Dataset, val: &Dataset) -> Result<()> {
    if train.is_empty() {
        return Err(Error::Parameter("training set is empty".into()));
    }
    if !val.is_empty() && (val.dim() != train.dim() || val.n_classes != train.n_classes) {
        return Err(Error::Parameter(format!(
            "train ({} features, {} classes) and val ({} features, {} classes) disagree",
            train.dim(),
            train.n_classes,
            val.dim(),
            val.n_classes
        )));
    }
    Ok(())
}

/// Shared epoch loop. Monitors validation error, or the training readout loss
/// when the validation set is empty, and returns the best snapshot.
pub fn fit<M, F>(
    cfg: &TrainConfig,
    train: &Dataset,
    val: &Dataset,
    mut model: M,
    mut step: F,
) -> Result<(M, Metrics)>
where
    M: Classifier + Clone,
    F: FnMut(&mut M, &Dataset) -> Result<BatchStats>,
{
    cfg.validate()?;
    check_datasets(train, val)?;
    let mut batcher = crate::data::Batcher::new(
        train.len(),
        cfg.batch_size,
        RngState::new(cfg.seed, Stream::DataShuffle),
    )?;
    let mut stopper = EarlyStopping::new(cfg.patience)?;
    let mut metrics = Metrics::new(cfg.seed);
    let mut best = model.clone();
    for epoch in 1..=cfg.max_epochs {
        let started = Instant::now();
        let (mut neuron_sum, mut readout_sum, mut correct) = (None::<f64>, 0.0, 0usize);
        for indices in batcher.next_epoch() {
            let batch = train.subset(&indices);
            let stats = step(&mut model, &batch)?;
            let w = batch.len() as f64;
            if let Some(l) = stats.neuron_loss {
                *neuron_sum.get_or_insert(0.0) += l * w;
            }
            readout_sum += stats.readout_loss * w;
            correct += stats.correct;
        }
        let n = train.len() as f64;
        let readout_loss = readout_sum / n;
        let val_err = if val.is_empty() {
            None
        } else {
            Some(evaluate(&model, val)?)
        };
        let record = EpochRecord {
            epoch,
            neuron_loss: neuron_sum.map(|s| s / n),
            readout_loss,
            train_err: 100.0 * (1.0 - correct as f64 / n),
            val_err,
            seconds: if cfg.timing {
                started.elapsed().as_secs_f64()
            } else {
                0.0
            },
        };
        metrics.epochs.push(record);
        let seen = stopper.observe(epoch, val_err.unwrap_or(readout_loss));
        if seen.improved {
            best = model.clone();
            metrics.best_epoch = epoch;
        }
        if seen.stop {
            break;
        }
    }
    Ok((best, metrics))
}

/// Trains a graph network with local objectives. `cfg.baseline` is ignored.
pub fn train_loop(
    cfg: &TrainConfig,
    train: &Dataset,
    val: &Dataset,
) -> Result<(CyclicNet, Metrics)> {
    cfg.validate()?;
    check_datasets(train, val)?;
    let topology = generate(&cfg.generator)?;
    let net_cfg = cfg.net_config(train.dim(), train.n_classes)?;
    let net = CyclicNet::build(
        topology,
        &net_cfg,
        &mut RngState::new(cfg.seed, Stream::Weights),
    )?;
    let freeze = Freeze {
        neurons: cfg.freeze_neurons,
        readout: cfg.freeze_readout,
    };
    let mut neg_rng = RngState::new(cfg.seed, Stream::NegativeLabels);
    fit(cfg, train, val, net, |net, batch| {
        let fused = fuse_inputs(
            &batch.features,
            &batch.labels,
            batch.n_classes,
            net.fusion,
            &mut neg_rng,
        )?;
        let report = net.train_iteration(&fused, freeze)?;
        let mean = report.neuron_losses.iter().sum::<f64>() / report.neuron_losses.len() as f64;
        Ok(BatchStats {
            neuron_loss: Some(mean),
            readout_loss: report.readout_loss,
            correct: report.readout_correct,
        })
    })
}

/// Trains the backprop MLP baseline on raw features with the same loop.
pub fn bp_chain_baseline(
    cfg: &TrainConfig,
    train: &Dataset,
    val: &Dataset,
) -> Result<(BpChain, Metrics)> {
    cfg.validate()?;
    check_datasets(train, val)?;
    let model = BpChain::new(
        train.dim(),
        cfg.d_out,
        BP_HIDDEN_LAYERS,
        train.n_classes,
        cfg.adam(),
        &mut RngState::new(cfg.seed, Stream::Weights),
    )?;
    fit(cfg, train, val, model, |model, batch| {
        let step = model.loss_and_grads(&batch.features, &batch.labels)?;
        model.apply(&step.grads)?;
        Ok(BatchStats {
            neuron_loss: None,
            readout_loss: step.loss,
            correct: step.correct,
        })
    })
}

/// A trained model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Graph(CyclicNet),
    Bp(BpChain),
}

impl Classifier for TrainedModel {
    fn predict(&self, features: &Matrix) -> Result<Vec<usize>> {
        match self {
            TrainedModel::Graph(n) => n.predict(features),
            TrainedModel::Bp(m) => m.predict(features),
        }
    }
}

impl TrainedModel {
    pub fn round_to_storage_precision(&mut self) {
        match self {
            TrainedModel::Graph(n) => n.round_to_storage_precision(),
            TrainedModel::Bp(m) => m.round_to_storage_precision(),
        }
    }

    pub fn to_checkpoint(&self) -> Vec<u8> {
        match self {
            TrainedModel::Graph(n) => write_checkpoint(n),
            TrainedModel::Bp(m) => write_bp_checkpoint(m),
        }
    }

    /// Reads either checkpoint kind, telling them apart by magic bytes.
    pub fn from_checkpoint(bytes: &[u8]) -> Result<Self> {
        if is_bp_checkpoint(bytes) {
            Ok(TrainedModel::Bp(read_bp_checkpoint(
                bytes,
                AdamConfig::default(),
            )?))
        } else {
            Ok(TrainedModel::Graph(read_checkpoint(
                bytes,
                AdamConfig::default(),
            )?))
        }
    }
}

/// Trains per `cfg.baseline`, rounds the result to checkpoint precision and,
/// when `test` is non-empty, records its test error.
pub fn run(
    cfg: &TrainConfig,
    train: &Dataset,
    val: &Dataset,
    test: &Dataset,
) -> Result<(TrainedModel, Metrics)> {
    let (mut model, mut metrics) = match cfg.baseline {
        Baseline::None => {
            let (net, m) = train_loop(cfg, train, val)?;
            (TrainedModel::Graph(net), m)
        }
        Baseline::BpChain => {
            let (bp, m) = bp_chain_baseline(cfg, train, val)?;
            (TrainedModel::Bp(bp), m)
        }
    };
    model.round_to_storage_precision();
    if !test.is_empty() {
        metrics.test_error = Some(evaluate(&model, test)?);
    }
    Ok((model, metrics))
}
