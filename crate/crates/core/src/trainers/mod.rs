//! Continual-learning trainers sharing one inner loop.

mod engine;
mod ops;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subspace::EpsilonSchedule;

pub use engine::{train_stream, Event, ProgressRecord, StreamOutcome, TaskRecord, Trainer};
pub use ops::{
    lambda_gradient, lambda_gradients, lambda_update, projected_weight_step, sharpness_ascent, AscentDirection,
    AscentSpace, Projector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fsdgpm,
    Fser,
    Er,
    Gpm,
    Dgpm,
    Fsgpm,
    Ladgpm,
    Finetune,
    Multitask,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Fsdgpm,
        Method::Fser,
        Method::Er,
        Method::Gpm,
        Method::Dgpm,
        Method::Fsgpm,
        Method::Ladgpm,
        Method::Finetune,
        Method::Multitask,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fsdgpm => "fsdgpm",
            Method::Fser => "fser",
            Method::Er => "er",
            Method::Gpm => "gpm",
            Method::Dgpm => "dgpm",
            Method::Fsgpm => "fsgpm",
            Method::Ladgpm => "ladgpm",
            Method::Finetune => "finetune",
            Method::Multitask => "multitask",
        }
    }

    /// Samples from and pushes into the replay buffer.
    pub fn uses_replay(self) -> bool {
        !matches!(self, Method::Finetune | Method::Multitask)
    }

    /// Maintains a projection memory and protects its subspace.
    pub fn uses_memory(self) -> bool {
        matches!(
            self,
            Method::Gpm | Method::Dgpm | Method::Fsgpm | Method::Fsdgpm | Method::Ladgpm
        )
    }

    /// Direction of the weight perturbation, `None` for no perturbation.
    pub fn perturbation(self) -> Option<AscentDirection> {
        match self {
            Method::Fsdgpm | Method::Fsgpm | Method::Fser => Some(AscentDirection::Ascent),
            Method::Ladgpm => Some(AscentDirection::Descent),
            _ => None,
        }
    }

    /// Adapts basis importance from the second task on.
    pub fn learns_importance(self) -> bool {
        matches!(self, Method::Fsdgpm | Method::Dgpm | Method::Ladgpm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Method::ALL.iter().copied().find(|m| m.name() == lower).ok_or_else(|| {
            let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
            Error::Usage(format!("unknown method '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub method: Method,
    /// Weight learning rate `η3`.
    pub lr: f64,
    /// Perturbation step size `η1`.
    pub fs_lr: f64,
    /// Importance step size `η2`.
    pub lambda_lr: f64,
    /// Perturbation steps `K`.
    pub fs_steps: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub glances: usize,
    pub mem_capacity: usize,
    pub n_s: usize,
    pub eps: f64,
    pub eps_increment: f64,
    pub seed: u64,
}

impl TrainerConfig {
    /// Permuted-MNIST settings for `method`.
    pub fn pmnist(method: Method) -> Self {
        let mut cfg = TrainerConfig {
            method,
            lr: 0.01,
            fs_lr: 0.05,
            lambda_lr: 0.01,
            fs_steps: 2,
            batch_size: 10,
            epochs: 1,
            glances: 5,
            mem_capacity: 200,
            n_s: 200,
            eps: 0.99,
            eps_increment: 0.0005,
            seed: 0,
        };
        match method {
            Method::Er | Method::Fser => cfg.lr = 0.005,
            Method::Gpm => cfg.n_s = 300,
            Method::Multitask => cfg.epochs = 5,
            _ => {}
        }
        cfg
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn schedule(&self, layers: usize) -> EpsilonSchedule {
        EpsilonSchedule::uniform(layers, self.eps, self.eps_increment)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lr", self.lr), ("fs_lr", self.fs_lr), ("lambda_lr", self.lambda_lr)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be positive"));
        }
        if self.glances == 0 {
            return Err(Error::invalid("glances must be positive"));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::invalid(format!("eps {} outside (0, 1]", self.eps)));
        }
        if !(self.eps_increment.is_finite() && self.eps_increment >= 0.0) {
            return Err(Error::invalid("eps_increment must be finite and >= 0"));
        }
        Ok(())
    }
}
