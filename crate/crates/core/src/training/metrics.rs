use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "epoch,neuron_loss,readout_loss,train_err,val_err,seconds";

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean local loss over neurons; absent for the backprop baseline.
    pub neuron_loss: Option<f64>,
    pub readout_loss: f64,
    pub train_err: f64,
    /// Absent when there is no validation set.
    pub val_err: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose snapshot was kept (1-based; 0 before any epoch).
    pub best_epoch: usize,
    pub test_error: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Metrics {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            epochs: Vec::new(),
            best_epoch: 0,
            test_error: None,
        }
    }

    pub fn best_record(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|r| r.epoch == self.best_epoch)
    }

    /// The value early stopping ranked runs by: validation error, else training
    /// readout loss.
    pub fn best_monitor(&self) -> Option<f64> {
        self.best_record()
            .map(|r| r.val_err.unwrap_or(r.readout_loss))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.epochs {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.epoch,
                opt(r.neuron_loss),
                r.readout_loss,
                r.train_err,
                opt(r.val_err),
                r.seconds
            )
            .unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Patience-based stopping on a value where lower is better.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<(usize, f64)>,
    stale: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    /// Strictly better than every earlier epoch.
    pub improved: bool,
    pub stop: bool,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Result<Self> {
        if patience == 0 {
            return Err(Error::Parameter("patience must be at least 1".into()));
        }
        Ok(Self {
            patience,
            best: None,
            stale: 0,
        })
    }

    pub fn observe(&mut self, epoch: usize, value: f64) -> Observation {
        let improved = self.best.is_none_or(|(_, b)| value < b);
        if improved {
            self.best = Some((epoch, value));
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        Observation {
            improved,
            stop: self.stale >= self.patience,
        }
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.best
    }
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
