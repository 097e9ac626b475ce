use crate::error::{Error, Result};
use crate::nn::{Batch, GradientSet, Head, Network, Perturbation};
use crate::numerics::{dot, Matrix};
use crate::subspace::{project_into, project_out, SubspaceMemory};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AscentDirection {
    Ascent,
    Descent,
}

impl AscentDirection {
    pub fn sign(self) -> f64 {
        match self {
            AscentDirection::Ascent => 1.0,
            AscentDirection::Descent => -1.0,
        }
    }
}

/// Per-layer bases paired with materialized importance values.
#[derive(Clone, Debug)]
pub struct Projector<'a> {
    pub bases: Vec<&'a Matrix>,
    pub importance: Vec<Vec<f64>>,
}

impl<'a> Projector<'a> {
    pub fn from_memory(memory: &'a SubspaceMemory) -> Self {
        Projector {
            bases: memory.layers.iter().map(|l| &l.basis).collect(),
            importance: memory.layers.iter().map(|l| l.importance()).collect(),
        }
    }

    /// Same bases with every `λ` set to `value`.
    pub fn uniform(memory: &'a SubspaceMemory, value: f64) -> Self {
        Projector {
            bases: memory.layers.iter().map(|l| &l.basis).collect(),
            importance: memory.layers.iter().map(|l| vec![value; l.rank()]).collect(),
        }
    }

    fn layer(&self, l: usize) -> Result<(&Matrix, &[f64])> {
        match (self.bases.get(l), self.importance.get(l)) {
            (Some(b), Some(i)) => Ok((b, i)),
            _ => Err(Error::invalid(format!("projector has no layer {l}"))),
        }
    }

    pub fn into_layer(&self, l: usize, g: &Matrix) -> Result<Matrix> {
        let (basis, importance) = self.layer(l)?;
        project_into(g, basis, importance)
    }

    pub fn out_of_layer(&self, l: usize, g: &Matrix) -> Result<Matrix> {
        let (basis, importance) = self.layer(l)?;
        if basis.cols() == 0 {
            return Ok(g.clone());
        }
        project_out(g, basis, importance)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum AscentSpace<'a> {
    Full,
    Subspace(&'a Projector<'a>),
}

/// `K` steps of `v ← v ± η1 · Π(∇_{w+v} L(batch))`, starting from `v = 0`.
pub fn sharpness_ascent(
    net: &Network,
    batch: &Batch,
    head: Head,
    fs_lr: f64,
    steps: usize,
    space: AscentSpace<'_>,
    direction: AscentDirection,
) -> Result<Perturbation> {
    let mut v = Perturbation::zeros_like(net);
    let step = direction.sign() * fs_lr;
    for _ in 0..steps {
        let (_, grads) = net.loss_and_grads(batch, Some(&v), head)?;
        for (l, g) in grads.layers.iter().enumerate() {
            match space {
                AscentSpace::Full => v.layers[l].axpy(step, g)?,
                AscentSpace::Subspace(p) => {
                    let inside = p.into_layer(l, g)?;
                    v.layers[l].axpy(step, &inside)?;
                }
            }
        }
    }
    Ok(v)
}

/// `η1 · ⟨G_task u, G_joint u⟩`.
pub fn lambda_gradient(u: &[f64], g_task: &Matrix, g_joint: &Matrix, fs_lr: f64) -> Result<f64> {
    if g_task.shape() != g_joint.shape() || u.len() != g_task.cols() {
        return Err(Error::invalid(format!(
            "lambda gradient shapes: task {:?}, joint {:?}, basis vector {}",
            g_task.shape(),
            g_joint.shape(),
            u.len()
        )));
    }
    let a: Vec<f64> = (0..g_task.rows()).map(|r| dot(g_task.row(r), u)).collect();
    let b: Vec<f64> = (0..g_joint.rows()).map(|r| dot(g_joint.row(r), u)).collect();
    Ok(fs_lr * dot(&a, &b))
}

/// `lambda_gradient` for every stored basis vector, layer by layer.
pub fn lambda_gradients(
    memory: &SubspaceMemory,
    g_task: &GradientSet,
    g_joint: &GradientSet,
    fs_lr: f64,
) -> Result<Vec<Vec<f64>>> {
    if g_task.layers.len() != memory.layers.len() || g_joint.layers.len() != memory.layers.len() {
        return Err(Error::invalid("gradient sets and memory disagree on layer count"));
    }
    let mut out = Vec::with_capacity(memory.layers.len());
    for (l, layer) in memory.layers.iter().enumerate() {
        let k = layer.rank();
        if k == 0 {
            out.push(Vec::new());
            continue;
        }
        let a = g_task.layers[l].matmul(&layer.basis)?;
        let b = g_joint.layers[l].matmul(&layer.basis)?;
        let mut g = vec![0.0; k];
        for r in 0..a.rows() {
            for (gi, (x, y)) in g.iter_mut().zip(a.row(r).iter().zip(b.row(r))) {
                *gi += x * y;
            }
        }
        g.iter_mut().for_each(|v| *v *= fs_lr);
        out.push(g);
    }
    Ok(out)
}

/// `ρ_i ← ρ_i − η2 · g_i`.
pub fn lambda_update(memory: &mut SubspaceMemory, grads: &[Vec<f64>], lambda_lr: f64) -> Result<()> {
    if grads.len() != memory.layers.len() || grads.iter().zip(&memory.layers).any(|(g, l)| g.len() != l.rank()) {
        return Err(Error::invalid("one importance gradient per basis vector required"));
    }
    for (layer, g) in memory.layers.iter_mut().zip(grads) {
        for (rho, gi) in layer.scores.iter_mut().zip(g) {
            *rho -= lambda_lr * gi;
        }
    }
    Ok(())
}

/// `W_l ← W_l − η3 · (G_l − G_l M_l Λ_l M_lᵀ)` with `G` taken at `w + v`.
/// Without a projector this is a plain SGD step. Returns the loss at `w + v`.
pub fn projected_weight_step(
    net: &mut Network,
    batch: &Batch,
    perturbation: Option<&Perturbation>,
    lr: f64,
    projector: Option<&Projector<'_>>,
    head: Head,
) -> Result<f64> {
    let (loss, mut grads) = net.loss_and_grads(batch, perturbation, head)?;
    if let Some(p) = projector {
        for (l, g) in grads.layers.iter_mut().enumerate() {
            *g = p.out_of_layer(l, g)?;
        }
    }
    net.sgd_step(&grads, lr)?;
    Ok(loss)
}
