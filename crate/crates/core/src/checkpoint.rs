//! Binary checkpoints: network weights followed by the projection memory.
//!
//! Layout (little-endian): 8-byte magic `FSDGPM01`; `u32` layer count; per
//! layer `u32` rows, `u32` cols, row-major `f64` weights; `u32` memory layer
//! count; per layer `u32` in_dim, `u32` k, row-major `f64` basis
//! (`in_dim × k`), `k` `f64` scores.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::{HeadMode, Network};
use crate::numerics::Matrix;
use crate::subspace::{LayerBasis, SubspaceMemory};

pub const MAGIC: &[u8; 8] = b"FSDGPM01";

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub weights: Vec<Matrix>,
    pub memory: SubspaceMemory,
}

impl Checkpoint {
    pub fn from_parts(net: &Network, memory: &SubspaceMemory) -> Self {
        Checkpoint {
            weights: net.weights().to_vec(),
            memory: memory.clone(),
        }
    }

    pub fn network(&self, head_mode: HeadMode) -> Result<Network> {
        Network::from_weights(self.weights.clone(), head_mode)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, self.weights.len());
        for w in &self.weights {
            put_u32(&mut out, w.rows());
            put_u32(&mut out, w.cols());
            put_f64s(&mut out, w.data());
        }
        put_u32(&mut out, self.memory.layers.len());
        for layer in &self.memory.layers {
            put_u32(&mut out, layer.in_dim());
            put_u32(&mut out, layer.rank());
            put_f64s(&mut out, layer.basis.data());
            put_f64s(&mut out, &layer.scores);
        }
        out
    }

    /// Parses `bytes`; `path` only labels errors.
    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0, path };
        if r.take(8, "magic")? != MAGIC {
            return Err(Error::format(path, "magic", "expected FSDGPM01"));
        }
        let layers = r.u32("layer count")?;
        let mut weights = Vec::with_capacity(layers.min(64));
        for _ in 0..layers {
            let rows = r.u32("rows")?;
            let cols = r.u32("cols")?;
            weights.push(Matrix::from_vec(rows, cols, r.f64s(rows, cols, "weights")?));
        }
        let memory_layers = r.u32("memory layer count")?;
        if memory_layers != layers {
            return Err(Error::format(
                path,
                "memory layer count",
                format!("{memory_layers} memory layers for {layers} weight layers"),
            ));
        }
        let mut memory = SubspaceMemory {
            layers: Vec::with_capacity(memory_layers),
        };
        for (l, w) in weights.iter().enumerate() {
            let in_dim = r.u32("in_dim")?;
            if in_dim != w.cols() {
                return Err(Error::format(
                    path,
                    "in_dim",
                    format!(
                        "layer {l} basis lives in R^{in_dim} but weights take {} inputs",
                        w.cols()
                    ),
                ));
            }
            let k = r.u32("k")?;
            let basis = Matrix::from_vec(in_dim, k, r.f64s(in_dim, k, "basis")?);
            let scores = r.f64s(k, 1, "scores")?;
            memory.layers.push(LayerBasis { basis, scores });
        }
        if r.pos != bytes.len() {
            return Err(Error::format(
                path,
                "trailing bytes",
                format!("{} unread bytes", bytes.len() - r.pos),
            ));
        }
        Ok(Checkpoint { weights, memory })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::decode(&bytes, path)
    }
}

/// `<method>_seed<seed>_task<t>.ckpt`, written after training task `t`.
pub fn file_name(method: &str, seed: u64, task: usize) -> String {
    format!("{method}_seed{seed}_task{task}.ckpt")
}

/// Recovers `(method, seed, task)` from a name produced by [`file_name`].
pub fn parse_file_name(path: &Path) -> Option<(String, u64, usize)> {
    let stem = path.file_name()?.to_str()?.strip_suffix(".ckpt")?;
    let (rest, task) = stem.rsplit_once("_task")?;
    let (method, seed) = rest.rsplit_once("_seed")?;
    Some((method.to_string(), seed.parse().ok()?, task.parse().ok()?))
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    let v = u32::try_from(v).expect("checkpoint dimension exceeds u32");
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, field: &'static str) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::format(
                    self.path,
                    field,
                    format!(
                        "truncated: need {n} bytes at offset {}, file has {}",
                        self.pos,
                        self.bytes.len()
                    ),
                )
            })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, field: &'static str) -> Result<usize> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn f64s(&mut self, rows: usize, cols: usize, field: &'static str) -> Result<Vec<f64>> {
        let n = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::format(self.path, field, "dimensions overflow"))?;
        let raw = self.take(n, field)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }
}
