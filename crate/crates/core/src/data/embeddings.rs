//! Binary container for precomputed sentence embeddings.
//!
//! Little-endian layout: `b"CNNE"`, `u32` version (1), `u32` n-samples, `u32` dim,
//! `u32` n-classes, then `n·dim` `f32` features row by row, then `n` `u16` labels.

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{format_err, Result};
use crate::numerics::Matrix;

const MAGIC: &[u8; 4] = b"CNNE";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

pub fn read_embeddings(bytes: &[u8], name: &str) -> Result<Dataset> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(format_err("missing CNNE header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let version = word(0);
    if version != VERSION {
        return Err(format_err(format!(
            "unsupported embedding version {version}"
        )));
    }
    let (n, dim, n_classes) = (word(1) as usize, word(2) as usize, word(3) as usize);
    let expected = HEADER_LEN + n * dim * 4 + n * 2;
    if bytes.len() != expected {
        return Err(format_err(format!(
            "embedding file has {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let body = &bytes[HEADER_LEN..];
    let (feature_bytes, label_bytes) = body.split_at(n * dim * 4);
    let features = feature_bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    let labels = label_bytes
        .chunks_exact(2)
        .map(|c| usize::from(u16::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Dataset::new(name, Matrix::new(n, dim, features)?, labels, n_classes)
}

/// Serializes a dataset; features are stored as `f32`.
pub fn write_embeddings(d: &Dataset) -> Result<Vec<u8>> {
    if d.n_classes > usize::from(u16::MAX) + 1 {
        return Err(format_err("too many classes for u16 labels"));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + d.features.as_slice().len() * 4 + d.len() * 2);
    out.extend_from_slice(MAGIC);
    for v in [VERSION, d.len() as u32, d.dim() as u32, d.n_classes as u32] {
        out.extend(v.to_le_bytes());
    }
    for &x in d.features.as_slice() {
        out.extend((x as f32).to_le_bytes());
    }
    for &y in &d.labels {
        out.extend((y as u16).to_le_bytes());
    }
    Ok(out)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_embeddings(&fs::read(path)?, &name)
}

pub fn save_embeddings(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_embeddings(d)?)?;
    Ok(())
}
