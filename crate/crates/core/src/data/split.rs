use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{param, Result};
use crate::numerics::{RngState, Stream};

/// Uniform random split into `(train, val)` with exactly `n_val` validation samples.
/// Both parts keep the original sample order.
pub fn split_counts(d: &Dataset, n_val: usize, rng: &mut RngState) -> Result<(Dataset, Dataset)> {
    if n_val > d.len() {
        return Err(param(format!(
            "cannot hold out {n_val} of {} samples",
            d.len()
        )));
    }
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.shuffle(rng);
    let (val, train) = order.split_at_mut(n_val);
    val.sort_unstable();
    train.sort_unstable();
    Ok((d.subset(train), d.subset(val)))
}

/// Per-epoch shuffled mini-batches over `n` training samples.
#[derive(Debug, Clone)]
pub struct Batcher {
    n: usize,
    batch_size: usize,
    rng: RngState,
}

impl Batcher {
    pub fn new(n: usize, batch_size: usize, rng: RngState) -> Result<Self> {
        if batch_size == 0 {
            return Err(param("batch size must be at least 1"));
        }
        Ok(Self { n, batch_size, rng })
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// Reshuffles and returns this epoch's batches; the last one may be short.
    pub fn next_epoch(&mut self) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.shuffle(&mut self.rng);
        order
            .chunks(self.batch_size)
            .map(<[usize]>::to_vec)
            .collect()
    }
}

/// Holds out `round(val_fraction · n)` samples and prepares the training batcher.
/// The split uses the split stream and the batch order the data-shuffle stream.
pub fn split_and_batch(
    d: &Dataset,
    val_fraction: f64,
    batch_size: usize,
    seed: u64,
) -> Result<(Dataset, Dataset, Batcher)> {
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(param(format!(
            "val fraction must be in [0, 1), got {val_fraction}"
        )));
    }
    let n_val = (val_fraction * d.len() as f64).round() as usize;
    let (train, val) = split_counts(d, n_val, &mut RngState::new(seed, Stream::Split))?;
    let batcher = Batcher::new(
        train.len(),
        batch_size,
        RngState::new(seed, Stream::DataShuffle),
    )?;
    Ok((train, val, batcher))
}
