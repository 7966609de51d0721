//! Tiny tensor blobs for moving Q/K/V between the CLI and the harness.
//!
//! Layout: a 16-byte header — magic `GTB1` (4 bytes), dtype code (1 byte,
//! `1` = f64 little-endian), rank (1 byte, at most 5), then five u16
//! little-endian dims — followed by the row-major payload. A JSON sidecar
//! (`<path>.json`) mirrors the metadata for tools that want it without
//! parsing binary; when present on read it is cross-checked.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"GTB1";
pub const DTYPE_F64: u8 = 1;
pub const MAX_RANK: usize = 5;

/// Dense row-major tensor of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    schema: u32,
    magic: String,
    dtype: String,
    rank: usize,
    dims: Vec<usize>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_RANK {
            return Err(Error::invalid(format!(
                "tensor rank must be 1..={MAX_RANK}, got {}",
                dims.len()
            )));
        }
        if dims.iter().any(|&d| d == 0 || d > u16::MAX as usize) {
            return Err(Error::invalid("tensor dims must be in 1..=65535"));
        }
        let expect: usize = dims.iter().product();
        if data.len() != expect {
            return Err(Error::shape(format!(
                "dims {:?} need {expect} elements, got {}",
                dims,
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let n = dims.iter().product();
        Self::new(dims, vec![0.0; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut off = 0;
        for (i, (&ix, &dim)) in idx.iter().zip(&self.dims).enumerate() {
            debug_assert!(ix < dim, "index {ix} out of bound {dim} at axis {i}");
            off = off * dim + ix;
        }
        off
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn at_mut(&mut self, idx: &[usize]) -> &mut f64 {
        let off = self.offset(idx);
        &mut self.data[off]
    }

    /// Contiguous sub-block at the given leading indices: for an LxHxd
    /// tensor, `slice(&[l, h])` is the d-vector and `slice(&[l])` the Hxd
    /// block.
    pub fn slice(&self, outer: &[usize]) -> &[f64] {
        assert!(outer.len() <= self.dims.len());
        let inner: usize = self.dims[outer.len()..].iter().product();
        let mut off = 0;
        for (&ix, &dim) in outer.iter().zip(&self.dims) {
            debug_assert!(ix < dim);
            off = off * dim + ix;
        }
        &self.data[off * inner..(off + 1) * inner]
    }
}

/// Serialize a tensor to its 16-byte-header blob.
pub fn encode(t: &Tensor) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 8 * t.data.len());
    buf.extend_from_slice(&MAGIC);
    buf.push(DTYPE_F64);
    buf.push(t.dims.len() as u8);
    for slot in 0..MAX_RANK {
        let d = t.dims.get(slot).copied().unwrap_or(0) as u16;
        buf.extend_from_slice(&d.to_le_bytes());
    }
    for v in &t.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

/// Parse a blob produced by [`encode`].
pub fn decode(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < 16 {
        return Err(Error::invalid("tensor blob shorter than its header"));
    }
    if bytes[0..4] != MAGIC {
        return Err(Error::invalid("bad magic; not a tensor blob"));
    }
    if bytes[4] != DTYPE_F64 {
        return Err(Error::invalid(format!(
            "unsupported dtype code {}",
            bytes[4]
        )));
    }
    let rank = bytes[5] as usize;
    if rank == 0 || rank > MAX_RANK {
        return Err(Error::invalid(format!("bad rank {rank}")));
    }
    let mut dims = Vec::with_capacity(rank);
    for slot in 0..rank {
        let off = 6 + 2 * slot;
        dims.push(u16::from_le_bytes([bytes[off], bytes[off + 1]]) as usize);
    }
    let count: usize = dims.iter().product();
    let payload = &bytes[16..];
    if payload.len() != count * 8 {
        return Err(Error::shape(format!(
            "payload holds {} bytes, dims {:?} need {}",
            payload.len(),
            dims,
            count * 8
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Tensor::new(dims, data)
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    os.into()
}

/// Write the blob and its JSON sidecar.
pub fn write_tensor(path: &Path, t: &Tensor) -> Result<()> {
    fs::write(path, encode(t))?;
    let sidecar = Sidecar {
        schema: 1,
        magic: String::from_utf8_lossy(&MAGIC).into_owned(),
        dtype: "f64".into(),
        rank: t.dims.len(),
        dims: t.dims.clone(),
    };
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

/// Read a blob; if the sidecar exists its dims must agree.
pub fn read_tensor(path: &Path) -> Result<Tensor> {
    let t = decode(&fs::read(path)?)?;
    let sc_path = sidecar_path(path);
    if sc_path.exists() {
        let sc: Sidecar = serde_json::from_slice(&fs::read(&sc_path)?)?;
        if sc.dims != t.dims {
            return Err(Error::invalid(format!(
                "sidecar dims {:?} disagree with blob dims {:?}",
                sc.dims, t.dims
            )));
        }
    }
    Ok(t)
}
