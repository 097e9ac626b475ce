//! One-dimensional loss profiles along filter-normalized random directions.

use std::io::Write;

use crate::data::TaskDataset;
use crate::error::{Error, Result};
use crate::nn::{Batch, Head, Network, Perturbation};
use crate::numerics::{Matrix, Rng};

pub const CSV_HEADER: &str = "method,checkpoint_task,eval_task,direction,alpha,loss";

/// Per-layer direction congruent with the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    pub layers: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeProfile {
    pub eval_task: usize,
    pub checkpoint_task: usize,
    pub direction_index: usize,
    /// `(alpha, loss)` pairs in grid order.
    pub samples: Vec<(f64, f64)>,
}

/// Gaussian direction with each row rescaled to the norm of the matching
/// weight row. Zero weight rows give zero direction rows.
pub fn sample_direction(net: &Network, rng: &mut Rng) -> Direction {
    let layers = net
        .weights()
        .iter()
        .map(|w| {
            let mut d = Matrix::zeros(w.rows(), w.cols());
            for r in 0..w.rows() {
                let row = d.row_mut(r);
                row.iter_mut().for_each(|x| *x = rng.normal());
                let target = w.row(r).iter().map(|x| x * x).sum::<f64>().sqrt();
                let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                let scale = if target == 0.0 || norm == 0.0 {
                    0.0
                } else {
                    target / norm
                };
                row.iter_mut().for_each(|x| *x *= scale);
            }
            d
        })
        .collect();
    Direction { layers }
}

/// `steps` evenly spaced points on `[min, max]`.
pub fn alpha_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !min.is_finite() || !max.is_finite() {
        return Err(Error::invalid("alpha grid needs finite bounds and at least one step"));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    if min >= max {
        return Err(Error::invalid(format!("alpha range [{min}, {max}] is empty")));
    }
    Ok((0..steps)
        .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
        .collect())
}

fn check_grid(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() || alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("alpha grid must be nonempty and strictly increasing"));
    }
    Ok(())
}

/// Mean cross-entropy of `w + α·d` over all of `data`, for every `α`.
pub fn scan(net: &Network, direction: &Direction, data: &Batch, alphas: &[f64], head: Head) -> Result<Vec<(f64, f64)>> {
    check_grid(alphas)?;
    alphas
        .iter()
        .map(|&alpha| {
            let v = Perturbation {
                layers: direction.layers.iter().map(|d| d.scale(alpha)).collect(),
            };
            let loss = net.dataset_loss(data, Some(&v), head)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("non-finite landscape loss at alpha {alpha}")));
            }
            Ok((alpha, loss))
        })
        .collect()
}

/// Profiles for the first `tasks_seen` tasks under `directions` fresh
/// directions; each direction is shared by every task.
pub fn scan_all(
    net: &Network,
    tasks: &[TaskDataset],
    tasks_seen: usize,
    directions: usize,
    alphas: &[f64],
    rng: &mut Rng,
) -> Result<Vec<LandscapeProfile>> {
    if tasks_seen == 0 || tasks_seen > tasks.len() {
        return Err(Error::invalid(format!(
            "tasks_seen {tasks_seen} outside 1..={}",
            tasks.len()
        )));
    }
    let mut profiles = Vec::with_capacity(directions * tasks_seen);
    for d in 0..directions {
        let direction = sample_direction(net, rng);
        for task in &tasks[..tasks_seen] {
            profiles.push(LandscapeProfile {
                eval_task: task.task_id,
                checkpoint_task: tasks_seen - 1,
                direction_index: d,
                samples: scan(net, &direction, &task.train, alphas, Head::PerSample)?,
            });
        }
    }
    Ok(profiles)
}

pub fn write_csv<W: Write>(mut out: W, method: &str, profiles: &[LandscapeProfile]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in profiles {
        for (alpha, loss) in &p.samples {
            writeln!(
                out,
                "{method},{},{},{},{alpha},{loss}",
                p.checkpoint_task, p.eval_task, p.direction_index
            )?;
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_synthetic_stream;
    use crate::nn::HeadMode;

    fn row_norm(m: &Matrix, r: usize) -> f64 {
        m.row(r).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn directions_match_filter_norms() {
        let mut rng = Rng::new(0);
        let mut net = Network::new(&[5, 4, 3], HeadMode::Single, &mut rng).unwrap();
        net.weights_mut()[0].row_mut(2).iter_mut().for_each(|x| *x = 0.0);
        net.weights_mut()[1].row_mut(0).copy_from_slice(&[2.0, 0.0, 0.0, 0.0]);
        let d = sample_direction(&net, &mut rng);
        for (w, dl) in net.weights().iter().zip(&d.layers) {
            for r in 0..w.rows() {
                let (target, got) = (row_norm(w, r), row_norm(dl, r));
                assert!((target - got).abs() <= 1e-10 * target.max(1.0));
            }
        }
        assert!(d.layers[0].row(2).iter().all(|x| *x == 0.0));
        assert!((row_norm(&d.layers[1], 0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_shapes() {
        let g = alpha_grid(-1.0, 1.0, 25).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[12], 0.0);
        assert_eq!((g[0], g[24]), (-1.0, 1.0));
        assert_eq!(alpha_grid(-1.0, 1.0, 3).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert!(alpha_grid(1.0, -1.0, 5).is_err());
        assert!(alpha_grid(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn origin_matches_training_loss_and_net_is_untouched() {
        let stream = make_synthetic_stream(3, 8, 3, 40, 1).unwrap();
        let net = Network::new(&[8, 6, 3], HeadMode::Single, &mut Rng::new(2)).unwrap();
        let before = net.clone();
        let grid = alpha_grid(-1.0, 1.0, 25).unwrap();
        let profiles = scan_all(&net, &stream.tasks, 2, 4, &grid, &mut Rng::new(3)).unwrap();
        assert_eq!(profiles.len(), 8);
        assert_eq!(net, before);
        for p in &profiles {
            assert_eq!(p.samples.len(), 25);
            let train = &stream.tasks[p.eval_task].train;
            let exact = net.dataset_loss(train, None, Head::PerSample).unwrap();
            assert_eq!(p.samples[12].1.to_bits(), exact.to_bits());
        }
        let again = scan_all(&net, &stream.tasks, 2, 4, &grid, &mut Rng::new(3)).unwrap();
        assert_eq!(profiles, again);
    }

    #[test]
    fn toy_profile_matches_closed_form() {
        // two opposite inputs, one weight per class: loss(α) = ln 2 + ln cosh α,
        // even about 0 with unit curvature there
        let w = Matrix::from_vec(2, 1, vec![0.0, 0.0]);
        let net = Network::from_weights(vec![w], HeadMode::Single).unwrap();
        let d = Direction {
            layers: vec![Matrix::from_vec(2, 1, vec![1.0, -1.0])],
        };
        let batch = Batch::for_task(Matrix::from_vec(2, 1, vec![1.0, -1.0]), vec![0, 0], 0).unwrap();
        let grid = alpha_grid(-0.5, 0.5, 11).unwrap();
        let prof = scan(&net, &d, &batch, &grid, Head::PerSample).unwrap();
        for (i, (alpha, loss)) in prof.iter().enumerate() {
            let exact = std::f64::consts::LN_2 + alpha.cosh().ln();
            assert!((loss - exact).abs() < 1e-12);
            assert!((loss - prof[grid.len() - 1 - i].1).abs() < 1e-12);
        }
        let h = grid[1] - grid[0];
        let curvature = (prof[4].1 - 2.0 * prof[5].1 + prof[6].1) / (h * h);
        assert!((curvature - 1.0).abs() < 0.01);
    }

    #[test]
    fn csv_layout() {
        let p = LandscapeProfile {
            eval_task: 1,
            checkpoint_task: 4,
            direction_index: 2,
            samples: vec![(-1.0, 0.5), (0.0, 0.25)],
        };
        let mut out = Vec::new();
        write_csv(&mut out, "er", &[p]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\ner,4,1,2,-1,0.5\ner,4,1,2,0,0.25\n"));
    }
}
