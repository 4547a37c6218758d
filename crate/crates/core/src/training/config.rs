use std::fmt;
use std::str::FromStr;

use crate::data::FusionMode;
use crate::error::{Error, Result};
use crate::graph::{GeneratorKind, GeneratorSpec};
use crate::network::NetConfig;
use crate::numerics::AdamConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Baseline {
    #[default]
    None,
    /// End-to-end backprop MLP on raw features.
    BpChain,
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::None => "none",
            Baseline::BpChain => "bp-chain",
        })
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Baseline::None),
            "bp-chain" => Ok(Baseline::BpChain),
            other => Err(Error::Config(format!(
                "unknown baseline {other:?} (expected none or bp-chain)"
            ))),
        }
    }
}

/// Everything one training run depends on besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub generator: GeneratorSpec,
    pub d_out: usize,
    /// Propagation steps per iteration.
    pub steps: usize,
    pub theta: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub freeze_neurons: bool,
    pub freeze_readout: bool,
    pub fusion: FusionMode,
    pub baseline: Baseline,
    /// Record wall-clock seconds per epoch. Off gives byte-stable metrics.
    pub timing: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            generator: GeneratorSpec::new(GeneratorKind::Complete, 4),
            d_out: 200,
            steps: 3,
            theta: 1.0,
            lr: 1e-3,
            weight_decay: 0.0,
            batch_size: 64,
            max_epochs: 100,
            patience: 10,
            seed: 0,
            freeze_neurons: false,
            freeze_readout: false,
            fusion: FusionMode::Concat,
            baseline: Baseline::None,
            timing: true,
        }
    }
}

/// Keys accepted by [`TrainConfig::set`], in the order [`TrainConfig::to_pairs`] emits them.
pub const TRAIN_KEYS: &[&str] = &[
    "graph",
    "n",
    "ws_k",
    "ws_p",
    "ba_m",
    "graph_seed",
    "d_out",
    "T",
    "theta",
    "lr",
    "weight_decay",
    "batch_size",
    "max_epochs",
    "patience",
    "seed",
    "freeze_neurons",
    "freeze_readout",
    "fusion",
    "baseline",
    "timing",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn parse_flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "bad value {value:?} for {key} (expected true/false)"
        ))),
    }
}

fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

impl TrainConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "graph" => {
                self.generator.kind = value
                    .parse()
                    .map_err(|e: Error| Error::Config(e.to_string()))?
            }
            "n" => self.generator.n = parse(key, value)?,
            "ws_k" => self.generator.ws_k = parse(key, value)?,
            "ws_p" => self.generator.ws_p = parse(key, value)?,
            "ba_m" => self.generator.ba_m = parse(key, value)?,
            "graph_seed" => self.generator.seed = parse(key, value)?,
            "d_out" => self.d_out = parse(key, value)?,
            "T" => self.steps = parse(key, value)?,
            "theta" => self.theta = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "weight_decay" => self.weight_decay = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "max_epochs" => self.max_epochs = parse(key, value)?,
            "patience" => self.patience = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "freeze_neurons" => self.freeze_neurons = parse_flag(key, value)?,
            "freeze_readout" => self.freeze_readout = parse_flag(key, value)?,
            "fusion" => {
                self.fusion = value
                    .parse()
                    .map_err(|e: Error| Error::Config(e.to_string()))?
            }
            "baseline" => self.baseline = value.parse()?,
            "timing" => self.timing = parse_flag(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Every setting as `(key, value)` text; feeding these back through
    /// [`set`](Self::set) reproduces the config.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let g = &self.generator;
        let values = [
            g.kind.to_string(),
            g.n.to_string(),
            g.ws_k.to_string(),
            g.ws_p.to_string(),
            g.ba_m.to_string(),
            g.seed.to_string(),
            self.d_out.to_string(),
            self.steps.to_string(),
            self.theta.to_string(),
            self.lr.to_string(),
            self.weight_decay.to_string(),
            self.batch_size.to_string(),
            self.max_epochs.to_string(),
            self.patience.to_string(),
            self.seed.to_string(),
            flag(self.freeze_neurons),
            flag(self.freeze_readout),
            self.fusion.to_string(),
            self.baseline.to_string(),
            flag(self.timing),
        ];
        TRAIN_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        let counts = [
            ("d_out", self.d_out),
            ("T", self.steps),
            ("batch_size", self.batch_size),
            ("max_epochs", self.max_epochs),
            ("patience", self.patience),
        ];
        if let Some((k, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Parameter(format!("{k} must be at least 1")));
        }
        // lr = 0 is allowed as a degenerate probe; negative or non-finite is not.
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Parameter(format!(
                "lr must be non-negative, got {}",
                self.lr
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Parameter("weight_decay must be non-negative".into()));
        }
        if !self.theta.is_finite() || self.theta < 0.0 {
            return Err(Error::Parameter("theta must be non-negative".into()));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig::with_lr(self.lr, self.weight_decay)
    }

    /// Network shape for raw features of width `dim` over `n_classes`.
    pub fn net_config(&self, dim: usize, n_classes: usize) -> Result<NetConfig> {
        Ok(NetConfig {
            base_dim: self.fusion.fused_dim(dim, n_classes)?,
            d_out: self.d_out,
            n_classes,
            theta: self.theta,
            steps: self.steps,
            fusion: self.fusion,
            adam: self.adam(),
        })
    }
}
