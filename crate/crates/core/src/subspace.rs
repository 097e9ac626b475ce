//! Gradient projection memory.
//!
//! Each layer keeps an orthonormal basis `M_l` (columns live in the layer's
//! input space) and one unconstrained score `ρ_i` per basis vector. The
//! importance used by the projections is `λ_i = sigmoid(T · ρ_i)` with the
//! fixed temperature `T = 10`. Bases are rebuilt from scratch after every
//! task from an SVD of buffer activations.

use crate::buffer::ReplayBuffer;
use crate::error::{Error, Result};
use crate::nn::{Head, HeadMode, Network};
use crate::numerics::{svd, Matrix, Rng};

pub const IMPORTANCE_TEMPERATURE: f64 = 10.0;

/// Score given to every freshly computed basis; `sigmoid(10 · 3) ≈ 1 − 1e-13`.
pub const INITIAL_SCORE: f64 = 3.0;

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LayerBasis {
    /// `in_dim × k`, orthonormal columns.
    pub basis: Matrix,
    /// Raw importance scores, one per column.
    pub scores: Vec<f64>,
}

impl LayerBasis {
    pub fn empty(in_dim: usize) -> Self {
        LayerBasis {
            basis: Matrix::zeros(in_dim, 0),
            scores: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn in_dim(&self) -> usize {
        self.basis.rows()
    }

    /// Materialized `λ`.
    pub fn importance(&self) -> Vec<f64> {
        self.scores
            .iter()
            .map(|&s| sigmoid(IMPORTANCE_TEMPERATURE * s))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceMemory {
    pub layers: Vec<LayerBasis>,
}

impl SubspaceMemory {
    /// No stored bases for any layer of `net`.
    pub fn empty_for(net: &Network) -> Self {
        SubspaceMemory {
            layers: net.weights().iter().map(|w| LayerBasis::empty(w.cols())).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.layers.iter().all(|l| l.rank() == 0)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.layers.iter().map(LayerBasis::rank).collect()
    }

    /// Mean `λ` over every stored basis, `None` when nothing is stored.
    pub fn mean_importance(&self) -> Option<f64> {
        let all: Vec<f64> = self.layers.iter().flat_map(LayerBasis::importance).collect();
        if all.is_empty() {
            None
        } else {
            Some(all.iter().sum::<f64>() / all.len() as f64)
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-layer energy thresholds growing linearly with the task index.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSchedule {
    pub base: Vec<f64>,
    pub increment: f64,
}

impl EpsilonSchedule {
    pub fn uniform(layers: usize, base: f64, increment: f64) -> Self {
        EpsilonSchedule {
            base: vec![base; layers],
            increment,
        }
    }

    /// `min(base_l + task · increment, 1)`.
    pub fn at(&self, layer: usize, task: usize) -> f64 {
        let base = self
            .base
            .get(layer)
            .copied()
            .unwrap_or(*self.base.last().unwrap_or(&1.0));
        (base + task as f64 * self.increment).min(1.0)
    }
}

/// Smallest `k` whose leading singular values hold at least `epsilon` of the
/// total energy. Zero for an all-zero spectrum.
pub fn rank_select(singular_values: &[f64], epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid(format!("epsilon {epsilon} outside (0, 1]")));
    }
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return Ok(0);
    }
    let target = epsilon * total;
    let mut acc = 0.0;
    for (i, s) in singular_values.iter().enumerate() {
        acc += s * s;
        if acc >= target {
            return Ok(i + 1);
        }
    }
    Ok(singular_values.len())
}

/// Representation matrices for up to `n_s` buffer samples: `R^l` is
/// `in_l × n` with one column per sample, holding that sample's input to
/// layer `l`. `None` if the buffer is empty.
pub fn build_representations(
    net: &Network,
    buffer: &ReplayBuffer,
    n_s: usize,
    rng: &mut Rng,
) -> Result<Option<Vec<Matrix>>> {
    if buffer.is_empty() {
        return Ok(None);
    }
    let batch = buffer.sample(n_s, rng);
    if batch.is_empty() {
        return Ok(None);
    }
    let (_, cache) = net.forward(&batch, None, Head::PerSample)?;
    Ok(Some(cache.inputs.iter().map(Matrix::transpose).collect()))
}

/// Rebuilds every projected layer's basis from the buffer and resets scores.
/// In multi-head mode the output layer is left untouched. An empty buffer
/// leaves the memory unchanged.
pub fn update_gpm(
    memory: &mut SubspaceMemory,
    net: &Network,
    buffer: &ReplayBuffer,
    n_s: usize,
    schedule: &EpsilonSchedule,
    task_index: usize,
    rng: &mut Rng,
) -> Result<()> {
    let Some(reps) = build_representations(net, buffer, n_s, rng)? else {
        return Ok(());
    };
    let projected = match net.head_mode() {
        HeadMode::Single => reps.len(),
        HeadMode::Multi { .. } => reps.len() - 1,
    };
    for (l, r) in reps.iter().enumerate().take(projected) {
        let decomposition = svd(r)?;
        let mut spectrum = decomposition.singular_values.clone();
        let cutoff = RANK_TOLERANCE * spectrum.first().copied().unwrap_or(0.0);
        for s in spectrum.iter_mut() {
            if *s < cutoff {
                *s = 0.0;
            }
        }
        let k = rank_select(&spectrum, schedule.at(l, task_index))?;
        memory.layers[l] = LayerBasis {
            basis: decomposition.left_vectors.leading_columns(k),
            scores: vec![INITIAL_SCORE; k],
        };
    }
    Ok(())
}

fn check_projection_shapes(g: &Matrix, basis: &Matrix, importance: &[f64]) -> Result<()> {
    if g.cols() != basis.rows() {
        return Err(Error::invalid(format!(
            "gradient has {} input columns but basis lives in R^{}",
            g.cols(),
            basis.rows()
        )));
    }
    if importance.len() != basis.cols() {
        return Err(Error::invalid(format!(
            "{} importance values for {} basis vectors",
            importance.len(),
            basis.cols()
        )));
    }
    Ok(())
}

/// `g · M · diag(λ) · Mᵀ`; zero for an empty basis.
pub fn project_into(g: &Matrix, basis: &Matrix, importance: &[f64]) -> Result<Matrix> {
    check_projection_shapes(g, basis, importance)?;
    if basis.cols() == 0 {
        return Ok(Matrix::zeros(g.rows(), g.cols()));
    }
    let mut coords = g.matmul(basis)?;
    coords.scale_columns(importance);
    coords.matmul_t(basis)
}

/// `g − project_into(g, M, λ)`.
pub fn project_out(g: &Matrix, basis: &Matrix, importance: &[f64]) -> Result<Matrix> {
    let inside = project_into(g, basis, importance)?;
    g.sub(&inside)
}
