//! Episodic memory kept uniform over the stream by reservoir sampling.

use crate::error::{Error, Result};
use crate::nn::Batch;
use crate::numerics::{Matrix, Rng};

#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    input_dim: usize,
    inputs: Vec<f64>,
    labels: Vec<usize>,
    task_ids: Vec<usize>,
    seen: u64,
    rng: Rng,
}

impl ReplayBuffer {
    /// Empty buffer; `rng` drives slot replacement.
    pub fn new(capacity: usize, input_dim: usize, rng: Rng) -> Self {
        ReplayBuffer {
            capacity,
            input_dim,
            inputs: Vec::with_capacity(capacity * input_dim),
            labels: Vec::with_capacity(capacity),
            task_ids: Vec::with_capacity(capacity),
            seen: 0,
            rng,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Items ever offered to the buffer.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Offers one item. Below capacity it is appended; afterwards it replaces
    /// a uniform slot with probability `capacity / seen`.
    pub fn push(&mut self, input: &[f64], label: usize, task_id: usize) -> Result<()> {
        if input.len() != self.input_dim {
            return Err(Error::invalid(format!(
                "buffer holds {}-dim inputs, got {}",
                self.input_dim,
                input.len()
            )));
        }
        self.seen += 1;
        if self.len() < self.capacity {
            self.inputs.extend_from_slice(input);
            self.labels.push(label);
            self.task_ids.push(task_id);
            return Ok(());
        }
        if self.capacity == 0 {
            return Ok(());
        }
        let j = self.rng.below(self.seen as usize);
        if j < self.capacity {
            self.inputs[j * self.input_dim..(j + 1) * self.input_dim].copy_from_slice(input);
            self.labels[j] = label;
            self.task_ids[j] = task_id;
        }
        Ok(())
    }

    /// Offers every row of `batch`, in order.
    pub fn push_batch(&mut self, batch: &Batch) -> Result<()> {
        for r in 0..batch.len() {
            self.push(batch.inputs.row(r), batch.labels[r], batch.task_ids[r])?;
        }
        Ok(())
    }

    /// Uniform sample of `min(b, len)` distinct slots, in random order.
    pub fn sample(&self, b: usize, rng: &mut Rng) -> Batch {
        if self.is_empty() || b == 0 {
            return Batch::empty(self.input_dim);
        }
        let slots = rng.sample_indices(self.len(), b);
        self.gather(&slots)
    }

    /// Slots currently stored, indexed `0..len`.
    pub fn gather(&self, slots: &[usize]) -> Batch {
        let mut data = Vec::with_capacity(slots.len() * self.input_dim);
        for &s in slots {
            data.extend_from_slice(&self.inputs[s * self.input_dim..(s + 1) * self.input_dim]);
        }
        Batch {
            inputs: Matrix::from_vec(slots.len(), self.input_dim, data),
            labels: slots.iter().map(|&s| self.labels[s]).collect(),
            task_ids: slots.iter().map(|&s| self.task_ids[s]).collect(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn task_ids(&self) -> &[usize] {
        &self.task_ids
    }
}
