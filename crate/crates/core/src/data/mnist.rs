use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use super::Dataset;
use crate::error::{format_err, Error, Result};
use crate::numerics::Matrix;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;
const MNIST_CLASSES: usize = 10;

/// Reads a file, transparently inflating it when it starts with the gzip magic.
fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| format_err(format!("{}: bad gzip stream: {e}", path.display())))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| format_err("truncated IDX header"))
}

/// Parses an IDX3 image file into `(n, rows·cols)` pixels scaled to `[0, 1]`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Matrix> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(format_err(format!(
            "bad image magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"
        )));
    }
    let n = be_u32(bytes, 4)? as usize;
    let dim = be_u32(bytes, 8)? as usize * be_u32(bytes, 12)? as usize;
    let payload = &bytes[16..];
    if payload.len() != n * dim {
        return Err(format_err(format!(
            "image payload has {} bytes, header declares {n}x{dim}",
            payload.len()
        )));
    }
    let data = payload.iter().map(|&p| f64::from(p) / 255.0).collect();
    Matrix::new(n, dim, data)
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(format_err(format!(
            "bad label magic {magic:#010x}, expected {LABELS_MAGIC:#010x}"
        )));
    }
    let n = be_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() != n {
        return Err(format_err(format!(
            "label payload has {} bytes, header declares {n}",
            payload.len()
        )));
    }
    Ok(payload.iter().map(|&b| usize::from(b)).collect())
}

/// Loads an MNIST image/label file pair (raw or gzipped IDX).
pub fn load_mnist_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset> {
    let images = images.as_ref();
    let features = parse_idx_images(&read_maybe_gz(images)?)?;
    let labels = parse_idx_labels(&read_maybe_gz(labels.as_ref())?)?;
    if features.rows() != labels.len() {
        return Err(Error::Consistency(format!(
            "{} images but {} labels",
            features.rows(),
            labels.len()
        )));
    }
    let name = images
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mnist".into());
    Dataset::new(name, features, labels, MNIST_CLASSES)
}

fn find(dir: &Path, stem: &str) -> Result<PathBuf> {
    let dotted = stem.replacen("-idx", ".idx", 1);
    for name in [
        stem.to_string(),
        format!("{stem}.gz"),
        dotted.clone(),
        format!("{dotted}.gz"),
    ] {
        let p = dir.join(name);
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(Error::Io(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("{stem}[.gz] not found in {}", dir.display()),
    )))
}

/// Loads `(train, test)` from a directory holding the four canonical MNIST files.
pub fn load_mnist_dir(dir: impl AsRef<Path>) -> Result<(Dataset, Dataset)> {
    let dir = dir.as_ref();
    let train = load_mnist_idx(
        find(dir, "train-images-idx3-ubyte")?,
        find(dir, "train-labels-idx1-ubyte")?,
    )?;
    let test = load_mnist_idx(
        find(dir, "t10k-images-idx3-ubyte")?,
        find(dir, "t10k-labels-idx1-ubyte")?,
    )?;
    Ok((train, test))
}
