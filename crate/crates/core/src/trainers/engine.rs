use std::time::Instant;

use log::{debug, info};
use serde::Serialize;

use super::ops::{lambda_gradients, lambda_update, projected_weight_step, sharpness_ascent, AscentSpace, Projector};
use super::{Method, TrainerConfig};
use crate::buffer::ReplayBuffer;
use crate::data::{TaskDataset, TaskStream};
use crate::error::{Error, Result};
use crate::metrics::AccuracyMatrix;
use crate::nn::{Batch, Head, HeadMode, Network};
use crate::numerics::{derive_seed, Rng};
use crate::subspace::{update_gpm, EpsilonSchedule, SubspaceMemory};

const INIT_STREAM: u64 = 0x494e_4954;
const RESERVOIR_STREAM: u64 = 0x5245_5356;
const REPLAY_STREAM: u64 = 0x5245_504c;
const GPM_STREAM: u64 = 0x4750_4d53;
const ORDER_STREAM: u64 = 0x4f52_4452;

const PROGRESS_INTERVAL: usize = 100;

#[derive(Clone, Debug, Serialize)]
pub struct ProgressRecord {
    pub task: usize,
    pub epoch: usize,
    pub batch: usize,
    pub loss: f64,
    pub buffer_len: usize,
    pub ranks: Vec<usize>,
    pub mean_lambda: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskRecord {
    pub task: usize,
    pub wallclock_secs: f64,
    pub buffer_len: usize,
    pub ranks: Vec<usize>,
    pub mean_lambda: Option<f64>,
}

pub enum Event<'a> {
    Progress(&'a ProgressRecord),
    TaskFinished { task: usize, trainer: &'a Trainer },
}

pub struct StreamOutcome {
    pub trainer: Trainer,
    pub matrix: AccuracyMatrix,
    pub history: Vec<TaskRecord>,
}

/// Mutable training state for one seeded run.
#[derive(Clone, Debug)]
pub struct Trainer {
    cfg: TrainerConfig,
    net: Network,
    memory: SubspaceMemory,
    buffer: ReplayBuffer,
    schedule: EpsilonSchedule,
    current_task: usize,
    replay_rng: Rng,
    gpm_rng: Rng,
    order_rng: Rng,
}

impl Trainer {
    pub fn new(cfg: TrainerConfig, layer_dims: &[usize], head_mode: HeadMode) -> Result<Self> {
        cfg.validate()?;
        let seed = cfg.seed;
        let net = Network::new(layer_dims, head_mode, &mut Rng::new(derive_seed(seed, INIT_STREAM)))?;
        let memory = SubspaceMemory::empty_for(&net);
        let buffer = ReplayBuffer::new(
            cfg.mem_capacity,
            net.input_dim(),
            Rng::new(derive_seed(seed, RESERVOIR_STREAM)),
        );
        let schedule = cfg.schedule(net.layer_count());
        Ok(Trainer {
            cfg,
            net,
            memory,
            buffer,
            schedule,
            current_task: 0,
            replay_rng: Rng::new(derive_seed(seed, REPLAY_STREAM)),
            gpm_rng: Rng::new(derive_seed(seed, GPM_STREAM)),
            order_rng: Rng::new(derive_seed(seed, ORDER_STREAM)),
        })
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.cfg
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn memory(&self) -> &SubspaceMemory {
        &self.memory
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn current_task(&self) -> usize {
        self.current_task
    }

    pub fn begin_task(&mut self, task: usize) {
        self.current_task = task;
    }

    /// One incoming batch: `glances` inner iterations, then the batch is
    /// offered to the buffer. Returns the mean loss at the perturbed weights.
    pub fn train_batch(&mut self, task_batch: &Batch) -> Result<f64> {
        let cfg = &self.cfg;
        let method = cfg.method;
        let head = Head::PerSample;
        let memory_active = method.uses_memory() && !self.memory.is_empty();
        let mut total = 0.0;
        for _ in 0..cfg.glances {
            let joint = if method.uses_replay() {
                let replay = self.buffer.sample(cfg.batch_size, &mut self.replay_rng);
                task_batch.concat(&replay)?
            } else {
                task_batch.clone()
            };

            let perturbation = match method.perturbation() {
                Some(direction) if cfg.fs_steps > 0 => Some(if memory_active {
                    let projector = Projector::from_memory(&self.memory);
                    sharpness_ascent(
                        &self.net,
                        task_batch,
                        head,
                        cfg.fs_lr,
                        cfg.fs_steps,
                        AscentSpace::Subspace(&projector),
                        direction,
                    )?
                } else {
                    sharpness_ascent(
                        &self.net,
                        &joint,
                        head,
                        cfg.fs_lr,
                        cfg.fs_steps,
                        AscentSpace::Full,
                        direction,
                    )?
                }),
                _ => None,
            };

            if memory_active && method.learns_importance() && self.current_task >= 1 {
                let (_, g_task) = self.net.loss_and_grads(task_batch, None, head)?;
                let (_, g_joint) = self.net.loss_and_grads(&joint, None, head)?;
                // For descent perturbations the derivative and the update
                // both change sign, so the same expression applies.
                let grads = lambda_gradients(&self.memory, &g_task, &g_joint, cfg.fs_lr)?;
                lambda_update(&mut self.memory, &grads, cfg.lambda_lr)?;
            }

            let projector = memory_active.then(|| Projector::from_memory(&self.memory));
            let loss = projected_weight_step(
                &mut self.net,
                &joint,
                perturbation.as_ref(),
                cfg.lr,
                projector.as_ref(),
                head,
            )?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("non-finite loss on task {}", self.current_task)));
            }
            total += loss;
        }
        if method.uses_replay() {
            self.buffer.push_batch(task_batch)?;
        }
        Ok(total / cfg.glances as f64)
    }

    /// Rebuilds the projection memory for methods that keep one.
    pub fn finish_task(&mut self) -> Result<()> {
        if self.cfg.method.uses_memory() {
            update_gpm(
                &mut self.memory,
                &self.net,
                &self.buffer,
                self.cfg.n_s,
                &self.schedule,
                self.current_task,
                &mut self.gpm_rng,
            )?;
        }
        Ok(())
    }

    fn progress(&self, epoch: usize, batch: usize, loss: f64) -> ProgressRecord {
        ProgressRecord {
            task: self.current_task,
            epoch,
            batch,
            loss,
            buffer_len: self.buffer.len(),
            ranks: self.memory.ranks(),
            mean_lambda: self.memory.mean_importance(),
        }
    }

    /// Trains `epochs` shuffled passes over `data` in batches of `batch_size`.
    pub fn train_epochs(&mut self, data: &Batch, observer: &mut dyn FnMut(Event<'_>) -> Result<()>) -> Result<()> {
        let b = self.cfg.batch_size;
        for epoch in 0..self.cfg.epochs {
            let order = self.order_rng.permutation(data.len());
            let mut running = 0.0;
            let mut count = 0usize;
            for (i, chunk) in order.chunks(b).enumerate() {
                let batch = data.select(chunk);
                running += self.train_batch(&batch)?;
                count += 1;
                let last = (i + 1) * b >= order.len();
                if (i + 1) % PROGRESS_INTERVAL == 0 || last {
                    let record = self.progress(epoch, i + 1, running / count as f64);
                    debug!(
                        "task {} epoch {} batch {} loss {:.4}",
                        record.task, record.epoch, record.batch, record.loss
                    );
                    observer(Event::Progress(&record))?;
                    running = 0.0;
                    count = 0;
                }
            }
        }
        Ok(())
    }

    /// Test accuracy on each of `tasks`.
    pub fn evaluate(&self, tasks: &[TaskDataset]) -> Result<Vec<f64>> {
        tasks
            .iter()
            .map(|t| self.net.dataset_accuracy(&t.test, Head::PerSample))
            .collect()
    }

    fn record(&self, started: Instant) -> TaskRecord {
        TaskRecord {
            task: self.current_task,
            wallclock_secs: started.elapsed().as_secs_f64(),
            buffer_len: self.buffer.len(),
            ranks: self.memory.ranks(),
            mean_lambda: self.memory.mean_importance(),
        }
    }
}

/// Trains every task of `stream` in order and fills the accuracy matrix.
/// Multitask trains once on the shuffled union and fills only the final row.
pub fn train_stream(
    cfg: &TrainerConfig,
    stream: &TaskStream,
    layer_dims: &[usize],
    head_mode: HeadMode,
    observer: &mut dyn FnMut(Event<'_>) -> Result<()>,
) -> Result<StreamOutcome> {
    if stream.is_empty() {
        return Err(Error::invalid("task stream is empty"));
    }
    if layer_dims.first() != Some(&stream.input_dim) {
        return Err(Error::invalid(format!(
            "network input {:?} does not match stream input {}",
            layer_dims.first(),
            stream.input_dim
        )));
    }
    let mut trainer = Trainer::new(cfg.clone(), layer_dims, head_mode)?;
    let t_count = stream.len();
    let mut matrix = AccuracyMatrix::new(t_count);
    let mut history = Vec::with_capacity(t_count);

    if cfg.method == Method::Multitask {
        let started = Instant::now();
        let mut union = stream.tasks[0].train.clone();
        for task in &stream.tasks[1..] {
            union = union.concat(&task.train)?;
        }
        trainer.begin_task(t_count - 1);
        trainer.train_epochs(&union, observer)?;
        history.push(trainer.record(started));
        for (j, a) in trainer.evaluate(&stream.tasks)?.into_iter().enumerate() {
            matrix.set(t_count - 1, j, a)?;
        }
        observer(Event::TaskFinished {
            task: t_count - 1,
            trainer: &trainer,
        })?;
        return Ok(StreamOutcome {
            trainer,
            matrix,
            history,
        });
    }

    for (t, task) in stream.tasks.iter().enumerate() {
        let started = Instant::now();
        trainer.begin_task(t);
        trainer.train_epochs(&task.train, observer)?;
        trainer.finish_task()?;
        history.push(trainer.record(started));
        let row = trainer.evaluate(&stream.tasks[..=t])?;
        info!(
            "{} task {t}: mean seen accuracy {:.4}, ranks {:?}",
            cfg.method,
            row.iter().sum::<f64>() / row.len() as f64,
            trainer.memory.ranks()
        );
        for (j, a) in row.into_iter().enumerate() {
            matrix.set(t, j, a)?;
        }
        observer(Event::TaskFinished {
            task: t,
            trainer: &trainer,
        })?;
    }
    Ok(StreamOutcome {
        trainer,
        matrix,
        history,
    })
}
