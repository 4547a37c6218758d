//! Binary checkpoints.
//!
//! Little-endian layout:
//!
//! ```text
//! b"CNN1"  u32 version
//! u32 steps  u32 n_classes  u32 base_dim  u32 fusion (0 concat, 1 overlay)
//! u32 n_neurons  u32 n_synapses  { u32 src  u32 dst } × n_synapses
//! { u32 d_in  u32 d_out  f32 theta  f32 W[d_out·d_in] } × n_neurons
//! u32 rows  u32 cols  f32 readout[rows·cols]
//! ```
//!
//! Weights are stored as `f32`; optimizer state is not stored.

use std::fs;
use std::path::Path;

use super::CyclicNet;
use crate::data::FusionMode;
use crate::error::{format_err, Result};
use crate::graph::Topology;
use crate::neuron::NeuronParams;
use crate::numerics::{AdamConfig, AdamState, Matrix};

const MAGIC: &[u8; 4] = b"CNN1";
const VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        self.0.extend((v as u32).to_le_bytes());
    }

    fn f32(&mut self, v: f64) {
        self.0.extend((v as f32).to_le_bytes());
    }

    fn matrix(&mut self, m: &Matrix) {
        for &x in m.as_slice() {
            self.f32(x);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| format_err("checkpoint truncated"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f32(&mut self) -> Result<f64> {
        Ok(f64::from(f32::from_le_bytes(
            self.take(4)?.try_into().unwrap(),
        )))
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let len = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| format_err("checkpoint matrix too large"))?;
        let data = self
            .take(len)?
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        Matrix::new(rows, cols, data)
    }
}

pub fn write_checkpoint(net: &CyclicNet) -> Vec<u8> {
    let mut w = Writer(MAGIC.to_vec());
    w.u32(VERSION as usize);
    w.u32(net.steps);
    w.u32(net.n_classes);
    w.u32(net.base_dim);
    w.u32(net.fusion.code() as usize);
    w.u32(net.topology.n_neurons());
    w.u32(net.topology.synapses().len());
    for &(src, dst) in net.topology.synapses() {
        w.u32(src);
        w.u32(dst);
    }
    for n in &net.neurons {
        w.u32(n.d_in());
        w.u32(n.d_out());
        w.f32(n.theta);
        w.matrix(&n.w);
    }
    w.u32(net.readout_w.rows());
    w.u32(net.readout_w.cols());
    w.matrix(&net.readout_w);
    w.0
}

/// Restores a network for inference; optimizer state starts fresh with `adam`.
pub fn read_checkpoint(bytes: &[u8], adam: AdamConfig) -> Result<CyclicNet> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(format_err("not a CNN1 checkpoint"));
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u32()?;
    if version != VERSION as usize {
        return Err(format_err(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let steps = r.u32()?;
    let n_classes = r.u32()?;
    let base_dim = r.u32()?;
    let fusion =
        FusionMode::from_code(r.u32()? as u32).ok_or_else(|| format_err("unknown fusion code"))?;
    let n = r.u32()?;
    let n_synapses = r.u32()?;
    let mut synapses = Vec::with_capacity(n_synapses.min(1 << 16));
    for _ in 0..n_synapses {
        synapses.push((r.u32()?, r.u32()?));
    }
    let topology = Topology::new(n, synapses)?;
    let mut neurons = Vec::with_capacity(n);
    for _ in 0..n {
        let d_in = r.u32()?;
        let d_out = r.u32()?;
        let theta = r.f32()?;
        neurons.push(NeuronParams::from_weights(
            r.matrix(d_out, d_in)?,
            theta,
            adam,
        )?);
    }
    let rows = r.u32()?;
    let cols = r.u32()?;
    let readout_w = r.matrix(rows, cols)?;
    if r.pos != bytes.len() {
        return Err(format_err("trailing bytes after checkpoint"));
    }
    let net = CyclicNet {
        topology,
        neurons,
        readout_adam: AdamState::new(rows, cols, adam),
        readout_w,
        base_dim,
        steps,
        n_classes,
        fusion,
    };
    net.validate()?;
    Ok(net)
}

pub fn save_checkpoint(net: &CyclicNet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_checkpoint(net))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<CyclicNet> {
    read_checkpoint(&fs::read(path)?, AdamConfig::default())
}
