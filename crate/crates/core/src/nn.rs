//! Bias-free fully connected ReLU network with softmax cross-entropy and
//! hand-written backpropagation.
//!
//! Layer `l` holds `W_l` of shape `out_l × in_l`; a batch row `x` maps to
//! `relu(x · W_lᵀ)` for hidden layers and to logits for the last one. Every
//! forward pass records the input of each layer so callers can build
//! representation matrices from it.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// How the output layer is shared between tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadMode {
    /// All tasks share every output unit.
    Single,
    /// Output rows are partitioned into one contiguous block per task.
    Multi { task_count: usize, classes_per_task: usize },
}

/// Which output block a pass reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head {
    /// Each row uses the head of its own `task_ids` entry.
    PerSample,
    /// Every row uses the head of this task.
    Task(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    layer_dims: Vec<usize>,
    weights: Vec<Matrix>,
    head_mode: HeadMode,
}

/// Inputs with their labels and task tags.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub inputs: Matrix,
    pub labels: Vec<usize>,
    pub task_ids: Vec<usize>,
}

/// Per-layer gradients, shaped like the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<Matrix>,
}

/// Per-layer weight displacement `v`, shaped like the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub layers: Vec<Matrix>,
}

/// Inputs fed into each layer during the last forward pass; entry 0 is the
/// raw batch, entry `l` is the post-ReLU output of layer `l - 1`.
#[derive(Clone, Debug)]
pub struct ActivationCache {
    pub inputs: Vec<Matrix>,
}

impl Batch {
    pub fn new(inputs: Matrix, labels: Vec<usize>, task_ids: Vec<usize>) -> Result<Self> {
        if inputs.rows() != labels.len() || labels.len() != task_ids.len() {
            return Err(Error::invalid(format!(
                "batch row counts disagree: inputs {}, labels {}, task ids {}",
                inputs.rows(),
                labels.len(),
                task_ids.len()
            )));
        }
        Ok(Batch {
            inputs,
            labels,
            task_ids,
        })
    }

    /// Batch whose rows all belong to `task_id`.
    pub fn for_task(inputs: Matrix, labels: Vec<usize>, task_id: usize) -> Result<Self> {
        let n = labels.len();
        Batch::new(inputs, labels, vec![task_id; n])
    }

    pub fn empty(input_dim: usize) -> Self {
        Batch {
            inputs: Matrix::zeros(0, input_dim),
            labels: Vec::new(),
            task_ids: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn select(&self, rows: &[usize]) -> Batch {
        Batch {
            inputs: self.inputs.select_rows(rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            task_ids: rows.iter().map(|&r| self.task_ids[r]).collect(),
        }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn concat(&self, other: &Batch) -> Result<Batch> {
        let inputs = self.inputs.vstack(&other.inputs)?;
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let mut task_ids = self.task_ids.clone();
        task_ids.extend_from_slice(&other.task_ids);
        Ok(Batch {
            inputs,
            labels,
            task_ids,
        })
    }
}

impl GradientSet {
    pub fn zeros_like(net: &Network) -> Self {
        GradientSet {
            layers: net.weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(Matrix::is_finite)
    }
}

impl Perturbation {
    pub fn zeros_like(net: &Network) -> Self {
        Perturbation {
            layers: net.weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.layers.iter().all(|m| m.data().iter().all(|v| *v == 0.0))
    }
}

impl Network {
    /// Network with uniform `±sqrt(6 / (in + out))` initialization.
    pub fn new(layer_dims: &[usize], head_mode: HeadMode, rng: &mut Rng) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(Error::invalid(format!("bad layer dims {layer_dims:?}")));
        }
        if let HeadMode::Multi {
            task_count,
            classes_per_task,
        } = head_mode
        {
            if task_count * classes_per_task != *layer_dims.last().unwrap() {
                return Err(Error::invalid(format!(
                    "multi-head output {} != {task_count} tasks x {classes_per_task} classes",
                    layer_dims.last().unwrap()
                )));
            }
        }
        let weights = layer_dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.uniform_range(-bound, bound))
                    .collect();
                Matrix::from_vec(fan_out, fan_in, data)
            })
            .collect();
        Ok(Network {
            layer_dims: layer_dims.to_vec(),
            weights,
            head_mode,
        })
    }

    /// Network with the given weights; dims are read from their shapes.
    pub fn from_weights(weights: Vec<Matrix>, head_mode: HeadMode) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("network needs at least one layer"));
        }
        let mut dims = vec![weights[0].cols()];
        for (l, w) in weights.iter().enumerate() {
            if w.cols() != *dims.last().unwrap() {
                return Err(Error::invalid(format!(
                    "layer {l} expects {} inputs but the previous layer emits {}",
                    w.cols(),
                    dims.last().unwrap()
                )));
            }
            if !w.is_finite() {
                return Err(Error::invalid(format!("layer {l} has non-finite weights")));
            }
            dims.push(w.rows());
        }
        if let HeadMode::Multi {
            task_count,
            classes_per_task,
        } = head_mode
        {
            if task_count * classes_per_task != *dims.last().unwrap() {
                return Err(Error::invalid("multi-head output size mismatch"));
            }
        }
        Ok(Network {
            layer_dims: dims,
            weights,
            head_mode,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn head_mode(&self) -> HeadMode {
        self.head_mode
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    /// Number of logits each head exposes.
    pub fn head_classes(&self) -> usize {
        match self.head_mode {
            HeadMode::Single => self.output_dim(),
            HeadMode::Multi { classes_per_task, .. } => classes_per_task,
        }
    }

    /// Column offset of `task`'s block in the full output.
    fn head_offset(&self, task: usize) -> Result<usize> {
        match self.head_mode {
            HeadMode::Single => Ok(0),
            HeadMode::Multi {
                task_count,
                classes_per_task,
            } => {
                if task >= task_count {
                    Err(Error::invalid(format!(
                        "head {task} out of range for {task_count} tasks"
                    )))
                } else {
                    Ok(task * classes_per_task)
                }
            }
        }
    }

    fn row_offsets(&self, batch: &Batch, head: Head) -> Result<Vec<usize>> {
        match head {
            Head::Task(t) => Ok(vec![self.head_offset(t)?; batch.len()]),
            Head::PerSample => batch.task_ids.iter().map(|&t| self.head_offset(t)).collect(),
        }
    }

    fn check_batch(&self, batch: &Batch) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::invalid("empty batch"));
        }
        if batch.input_dim() != self.input_dim() {
            return Err(Error::invalid(format!(
                "batch input dim {} != network input dim {}",
                batch.input_dim(),
                self.input_dim()
            )));
        }
        let classes = self.head_classes();
        if let Some(bad) = batch.labels.iter().find(|&&y| y >= classes) {
            return Err(Error::invalid(format!("label {bad} >= head size {classes}")));
        }
        Ok(())
    }

    fn effective_weights<'a>(&'a self, perturbation: Option<&Perturbation>) -> Result<Vec<Cow<'a, Matrix>>> {
        match perturbation {
            None => Ok(self.weights.iter().map(Cow::Borrowed).collect()),
            Some(p) => {
                if p.layers.len() != self.weights.len() {
                    return Err(Error::invalid("perturbation layer count mismatch"));
                }
                self.weights
                    .iter()
                    .zip(&p.layers)
                    .map(|(w, v)| w.add(v).map(Cow::Owned))
                    .collect()
            }
        }
    }

    /// Runs the network (at `w + v` when a perturbation is supplied) and
    /// returns the selected head's logits plus the per-layer inputs.
    pub fn forward(
        &self,
        batch: &Batch,
        perturbation: Option<&Perturbation>,
        head: Head,
    ) -> Result<(Matrix, ActivationCache)> {
        self.check_batch(batch)?;
        let offsets = self.row_offsets(batch, head)?;
        let weights = self.effective_weights(perturbation)?;
        let (full, cache) = forward_raw(&weights, &batch.inputs)?;
        Ok((self.slice_heads(&full, &offsets), cache))
    }

    fn slice_heads(&self, full: &Matrix, offsets: &[usize]) -> Matrix {
        let classes = self.head_classes();
        if classes == full.cols() {
            return full.clone();
        }
        let mut out = Matrix::zeros(full.rows(), classes);
        for (r, &off) in offsets.iter().enumerate() {
            out.row_mut(r).copy_from_slice(&full.row(r)[off..off + classes]);
        }
        out
    }

    /// Mean cross-entropy of the batch.
    pub fn loss(&self, batch: &Batch, perturbation: Option<&Perturbation>, head: Head) -> Result<f64> {
        let (logits, _) = self.forward(batch, perturbation, head)?;
        Ok(softmax_cross_entropy(&logits, &batch.labels).0)
    }

    /// Mean cross-entropy and its exact gradient, evaluated at `w + v` when a
    /// perturbation is supplied. Gradients are with respect to the weights
    /// actually used.
    pub fn loss_and_grads(
        &self,
        batch: &Batch,
        perturbation: Option<&Perturbation>,
        head: Head,
    ) -> Result<(f64, GradientSet)> {
        self.check_batch(batch)?;
        let offsets = self.row_offsets(batch, head)?;
        let weights = self.effective_weights(perturbation)?;
        let (full, cache) = forward_raw(&weights, &batch.inputs)?;
        let logits = self.slice_heads(&full, &offsets);
        let (loss, dlogits) = softmax_cross_entropy(&logits, &batch.labels);

        // Scatter the head gradient back into the full output width.
        let mut delta = if dlogits.cols() == full.cols() {
            dlogits
        } else {
            let mut d = Matrix::zeros(full.rows(), full.cols());
            let classes = dlogits.cols();
            for (r, &off) in offsets.iter().enumerate() {
                d.row_mut(r)[off..off + classes].copy_from_slice(dlogits.row(r));
            }
            d
        };

        let layers = weights.len();
        let mut grads = vec![Matrix::zeros(0, 0); layers];
        for l in (0..layers).rev() {
            let input = &cache.inputs[l];
            grads[l] = delta.t_matmul(input)?;
            if l > 0 {
                let mut upstream = delta.matmul(&weights[l])?;
                // ReLU derivative: the cached input of layer l is relu(z_{l-1}).
                for (g, a) in upstream.data_mut().iter_mut().zip(input.data()) {
                    if *a <= 0.0 {
                        *g = 0.0;
                    }
                }
                delta = upstream;
            }
        }
        Ok((loss, GradientSet { layers: grads }))
    }

    /// `W_l ← W_l − lr · G_l`.
    pub fn sgd_step(&mut self, grads: &GradientSet, lr: f64) -> Result<()> {
        self.check_congruent(&grads.layers)?;
        if !grads.is_finite() {
            return Err(Error::Numeric("non-finite gradient in sgd step".into()));
        }
        for (w, g) in self.weights.iter_mut().zip(&grads.layers) {
            w.axpy(-lr, g)?;
        }
        Ok(())
    }

    pub(crate) fn check_congruent(&self, layers: &[Matrix]) -> Result<()> {
        if layers.len() != self.weights.len() || layers.iter().zip(&self.weights).any(|(a, b)| a.shape() != b.shape()) {
            return Err(Error::invalid("per-layer matrices not congruent with weights"));
        }
        Ok(())
    }

    /// Fraction of rows whose argmax logit (lowest index on ties) equals the label.
    pub fn accuracy(&self, batch: &Batch, head: Head) -> Result<f64> {
        let (logits, _) = self.forward(batch, None, head)?;
        let correct = (0..logits.rows())
            .filter(|&r| argmax(logits.row(r)) == batch.labels[r])
            .count();
        Ok(correct as f64 / batch.len() as f64)
    }

    /// Mean loss over a whole dataset, evaluated in fixed-size chunks.
    pub fn dataset_loss(&self, data: &Batch, perturbation: Option<&Perturbation>, head: Head) -> Result<f64> {
        self.check_batch(data)?;
        let weights = self.effective_weights(perturbation)?;
        let offsets = self.row_offsets(data, head)?;
        let mut total = 0.0;
        for start in (0..data.len()).step_by(EVAL_CHUNK) {
            let end = (start + EVAL_CHUNK).min(data.len());
            let rows: Vec<usize> = (start..end).collect();
            let chunk = data.select(&rows);
            let (full, _) = forward_raw(&weights, &chunk.inputs)?;
            let logits = self.slice_heads(&full, &offsets[start..end]);
            total += softmax_cross_entropy(&logits, &chunk.labels).0 * chunk.len() as f64;
        }
        Ok(total / data.len() as f64)
    }

    /// Accuracy over a whole dataset, evaluated in fixed-size chunks.
    pub fn dataset_accuracy(&self, data: &Batch, head: Head) -> Result<f64> {
        self.check_batch(data)?;
        let mut correct = 0usize;
        for start in (0..data.len()).step_by(EVAL_CHUNK) {
            let end = (start + EVAL_CHUNK).min(data.len());
            let rows: Vec<usize> = (start..end).collect();
            let chunk = data.select(&rows);
            let (logits, _) = self.forward(&chunk, None, head)?;
            correct += (0..logits.rows())
                .filter(|&r| argmax(logits.row(r)) == chunk.labels[r])
                .count();
        }
        Ok(correct as f64 / data.len() as f64)
    }
}

const EVAL_CHUNK: usize = 1000;

fn forward_raw(weights: &[Cow<'_, Matrix>], inputs: &Matrix) -> Result<(Matrix, ActivationCache)> {
    let mut cache = Vec::with_capacity(weights.len());
    let mut current = inputs.clone();
    let last = weights.len() - 1;
    for (l, w) in weights.iter().enumerate() {
        let mut z = current.matmul_t(w)?;
        if l < last {
            for v in z.data_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        cache.push(current);
        current = z;
    }
    Ok((current, ActivationCache { inputs: cache }))
}

/// Lowest index of the maximum entry.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Mean softmax cross-entropy and its gradient with respect to the logits.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize]) -> (f64, Matrix) {
    let n = logits.rows();
    let inv_n = 1.0 / n as f64;
    let mut grad = Matrix::zeros(n, logits.cols());
    let mut total = 0.0;
    for r in 0..n {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|z| (z - max).exp()).sum();
        let log_sum = max + sum.ln();
        total += log_sum - row[labels[r]];
        let g = grad.row_mut(r);
        for (c, z) in row.iter().enumerate() {
            g[c] = (z - log_sum).exp() * inv_n;
        }
        g[labels[r]] -= inv_n;
    }
    (total * inv_n, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gaussian_matrix;

    fn single_layer(w: Matrix) -> Network {
        Network::from_weights(vec![w], HeadMode::Single).unwrap()
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let net = single_layer(Matrix::identity(3));
        let batch = Batch::for_task(Matrix::from_vec(1, 3, vec![0.5, -1.0, 2.0]), vec![0], 0).unwrap();
        let (logits, cache) = net.forward(&batch, None, Head::Task(0)).unwrap();
        assert_eq!(logits.data(), &[0.5, -1.0, 2.0]);
        assert_eq!(cache.inputs.len(), 1);
    }

    #[test]
    fn negative_preactivations_are_clamped() {
        let w0 = Matrix::filled(2, 2, -1.0);
        let w1 = Matrix::identity(2);
        let net = Network::from_weights(vec![w0, w1], HeadMode::Single).unwrap();
        let batch = Batch::for_task(Matrix::from_vec(1, 2, vec![1.0, 2.0]), vec![0], 0).unwrap();
        let (logits, cache) = net.forward(&batch, None, Head::Task(0)).unwrap();
        assert_eq!(cache.inputs[1].data(), &[0.0, 0.0]);
        assert_eq!(logits.data(), &[0.0, 0.0]);
    }

    #[test]
    fn zero_perturbation_matches_plain_forward() {
        let mut rng = Rng::new(1);
        let net = Network::new(&[5, 4, 3], HeadMode::Single, &mut rng).unwrap();
        let batch = Batch::for_task(gaussian_matrix(&mut rng, 6, 5), vec![0, 1, 2, 0, 1, 2], 0).unwrap();
        let zero = Perturbation::zeros_like(&net);
        let (a, _) = net.forward(&batch, None, Head::Task(0)).unwrap();
        let (b, _) = net.forward(&batch, Some(&zero), Head::Task(0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_logits_give_log_classes() {
        let net = single_layer(Matrix::zeros(10, 4));
        let batch = Batch::for_task(Matrix::filled(3, 4, 1.0), vec![0, 5, 9], 0).unwrap();
        let loss = net.loss(&batch, None, Head::Task(0)).unwrap();
        assert!((loss - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn two_class_identity_example() {
        let net = single_layer(Matrix::identity(2));
        let batch = Batch::for_task(Matrix::from_vec(1, 2, vec![1.0, 0.0]), vec![0], 0).unwrap();
        let (loss, grads) = net.loss_and_grads(&batch, None, Head::Task(0)).unwrap();
        assert!((loss - 0.3133).abs() < 1e-4, "{loss}");
        let g = &grads.layers[0];
        assert!((g.get(0, 0) + 0.2689).abs() < 1e-4);
        assert!((g.get(1, 0) - 0.2689).abs() < 1e-4);
        assert_eq!(g.get(0, 1), 0.0);
        assert_eq!(g.get(1, 1), 0.0);

        // central differences
        let h = 1e-5;
        for r in 0..2 {
            for c in 0..2 {
                let mut plus = net.clone();
                let w = net.weights()[0].get(r, c);
                plus.weights_mut()[0].set(r, c, w + h);
                let mut minus = net.clone();
                minus.weights_mut()[0].set(r, c, w - h);
                let fd = (plus.loss(&batch, None, Head::Task(0)).unwrap()
                    - minus.loss(&batch, None, Head::Task(0)).unwrap())
                    / (2.0 * h);
                assert!((fd - g.get(r, c)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn duplicated_rows_do_not_change_mean() {
        let mut rng = Rng::new(2);
        let net = Network::new(&[4, 3, 2], HeadMode::Single, &mut rng).unwrap();
        let x = gaussian_matrix(&mut rng, 1, 4);
        let one = Batch::for_task(x.clone(), vec![1], 0).unwrap();
        let two = Batch::for_task(x.vstack(&x).unwrap(), vec![1, 1], 0).unwrap();
        let (l1, g1) = net.loss_and_grads(&one, None, Head::Task(0)).unwrap();
        let (l2, g2) = net.loss_and_grads(&two, None, Head::Task(0)).unwrap();
        assert!((l1 - l2).abs() < 1e-15);
        for (a, b) in g1.layers.iter().zip(&g2.layers) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }
    }

    #[test]
    fn forward_and_loss_and_grads_agree_bitwise() {
        let mut rng = Rng::new(3);
        let net = Network::new(&[6, 5, 4], HeadMode::Single, &mut rng).unwrap();
        let batch = Batch::for_task(gaussian_matrix(&mut rng, 7, 6), vec![0, 1, 2, 3, 0, 1, 2], 0).unwrap();
        let mut p = Perturbation::zeros_like(&net);
        p.layers[0] = gaussian_matrix(&mut rng, 5, 6).scale(0.01);
        let a = net.loss(&batch, Some(&p), Head::Task(0)).unwrap();
        let (b, _) = net.loss_and_grads(&batch, Some(&p), Head::Task(0)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn sgd_step_examples() {
        let mut rng = Rng::new(4);
        let mut net = Network::new(&[3, 2], HeadMode::Single, &mut rng).unwrap();
        let before = net.clone();
        let grads = GradientSet {
            layers: vec![gaussian_matrix(&mut rng, 2, 3)],
        };
        net.sgd_step(&grads, 0.0).unwrap();
        assert_eq!(net, before);

        let g = GradientSet {
            layers: vec![Matrix::from_vec(2, 3, vec![2.0, 0.0, 0.0, 0.0, 2.0, 0.0])],
        };
        net.sgd_step(&g, 1.0).unwrap();
        let expected = before.weights()[0].sub(&g.layers[0]).unwrap();
        assert_eq!(net.weights()[0], expected);

        let bad = GradientSet {
            layers: vec![Matrix::from_vec(2, 3, vec![f64::NAN; 6])],
        };
        assert!(matches!(net.sgd_step(&bad, 0.1), Err(Error::Numeric(_))));
    }

    #[test]
    fn two_steps_equal_one_summed_step_on_frozen_grads() {
        let mut rng = Rng::new(5);
        let net = Network::new(&[3, 3, 2], HeadMode::Single, &mut rng).unwrap();
        let g1 = GradientSet {
            layers: vec![gaussian_matrix(&mut rng, 3, 3), gaussian_matrix(&mut rng, 2, 3)],
        };
        let g2 = GradientSet {
            layers: vec![gaussian_matrix(&mut rng, 3, 3), gaussian_matrix(&mut rng, 2, 3)],
        };
        let mut twice = net.clone();
        twice.sgd_step(&g1, 0.1).unwrap();
        twice.sgd_step(&g2, 0.1).unwrap();
        let sum = GradientSet {
            layers: g1
                .layers
                .iter()
                .zip(&g2.layers)
                .map(|(a, b)| a.add(b).unwrap())
                .collect(),
        };
        let mut once = net.clone();
        once.sgd_step(&sum, 0.1).unwrap();
        for (a, b) in twice.weights().iter().zip(once.weights()) {
            assert!(a.max_abs_diff(b) < 1e-14);
        }
    }

    #[test]
    fn accuracy_examples() {
        // W = 10·I makes the label coordinate dominate.
        let net = single_layer(Matrix::identity(3).scale(10.0));
        let batch = Batch::for_task(Matrix::identity(3), vec![0, 1, 2], 0).unwrap();
        assert_eq!(net.accuracy(&batch, Head::Task(0)).unwrap(), 1.0);

        // ties resolve to the lowest index
        assert_eq!(argmax(&[1.0, 1.0, 0.5]), 0);

        let mut rng = Rng::new(6);
        let net = Network::new(&[20, 16, 10], HeadMode::Single, &mut rng).unwrap();
        let x = gaussian_matrix(&mut rng, 10_000, 20);
        let labels: Vec<usize> = (0..10_000).map(|_| rng.below(10)).collect();
        let batch = Batch::for_task(x, labels, 0).unwrap();
        let acc = net.dataset_accuracy(&batch, Head::Task(0)).unwrap();
        assert!((0.06..=0.14).contains(&acc), "chance accuracy {acc}");

        let multi = Network::new(
            &[4, 6],
            HeadMode::Multi {
                task_count: 2,
                classes_per_task: 3,
            },
            &mut rng,
        )
        .unwrap();
        let b = Batch::for_task(Matrix::zeros(1, 4), vec![0], 0).unwrap();
        assert!(multi.accuracy(&b, Head::Task(2)).is_err());
        assert!(net.accuracy(&Batch::empty(20), Head::Task(0)).is_err());
    }

    #[test]
    fn multi_head_masks_other_heads() {
        let mut rng = Rng::new(7);
        let head_mode = HeadMode::Multi {
            task_count: 3,
            classes_per_task: 2,
        };
        let net = Network::new(&[5, 4, 6], head_mode, &mut rng).unwrap();
        let batch = Batch::for_task(gaussian_matrix(&mut rng, 4, 5), vec![0, 1, 1, 0], 1).unwrap();
        let (logits, _) = net.forward(&batch, None, Head::PerSample).unwrap();
        assert_eq!(logits.cols(), 2);
        let (_, grads) = net.loss_and_grads(&batch, None, Head::PerSample).unwrap();
        let last = grads.layers.last().unwrap();
        for r in [0, 1, 4, 5] {
            assert!(last.row(r).iter().all(|v| *v == 0.0));
        }
        assert!(last.row(2).iter().any(|v| *v != 0.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let net = single_layer(Matrix::identity(3));
        let batch = Batch::for_task(Matrix::zeros(1, 2), vec![0], 0).unwrap();
        assert!(matches!(
            net.forward(&batch, None, Head::Task(0)),
            Err(Error::InvalidInput(_))
        ));
        assert!(Batch::new(Matrix::zeros(2, 2), vec![0], vec![0]).is_err());
    }
}
