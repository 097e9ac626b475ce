//! Accuracy-matrix bookkeeping and the ACC / BWT summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `R[i][j]` is the test accuracy on task `j` after training task `i`,
/// defined only for `j <= i`. Values are fractions in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMatrix {
    task_count: usize,
    rows: Vec<Vec<Option<f64>>>,
}

impl AccuracyMatrix {
    pub fn new(task_count: usize) -> Self {
        AccuracyMatrix {
            task_count,
            rows: (0..task_count).map(|i| vec![None; i + 1]).collect(),
        }
    }

    /// Builds from fully populated lower-triangular rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut m = AccuracyMatrix::new(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    i + 1
                )));
            }
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v)?;
            }
        }
        Ok(m)
    }

    pub fn task_count(&self) -> usize {
        self.task_count
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i >= self.task_count || j > i {
            return Err(Error::invalid(format!("entry ({i}, {j}) outside the lower triangle")));
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!("accuracy {value} outside [0, 1]")));
        }
        self.rows[i][j] = Some(value);
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.rows.get(i).and_then(|r| r.get(j)).copied().flatten()
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.rows
    }

    fn final_row(&self) -> Result<Vec<f64>> {
        let last = self
            .rows
            .last()
            .ok_or_else(|| Error::State("accuracy matrix has no tasks".into()))?;
        last.iter()
            .enumerate()
            .map(|(j, v)| v.ok_or_else(|| Error::State(format!("final row missing task {j}"))))
            .collect()
    }

    /// Mean of the final row.
    pub fn acc(&self) -> Result<f64> {
        let row = self.final_row()?;
        Ok(row.iter().sum::<f64>() / row.len() as f64)
    }

    /// Mean change from just-learned to final accuracy over all but the last task.
    pub fn bwt(&self) -> Result<f64> {
        if self.task_count < 2 {
            return Err(Error::UndefinedMetric(format!(
                "backward transfer needs at least 2 tasks, have {}",
                self.task_count
            )));
        }
        let row = self.final_row()?;
        let mut total = 0.0;
        for (i, last) in row.iter().enumerate().take(self.task_count - 1) {
            let diag = self
                .get(i, i)
                .ok_or_else(|| Error::State(format!("diagonal entry {i} missing")))?;
            total += last - diag;
        }
        Ok(total / (self.task_count - 1) as f64)
    }
}

/// Sample mean and standard deviation (`n − 1` denominator, 0 for one value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}
