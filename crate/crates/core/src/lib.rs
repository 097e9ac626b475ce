//! Continual learning on task streams with gradient projection memory,
//! sharpness-flattening weight perturbations and replay.

pub mod buffer;
pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod error;
pub mod landscape;
pub mod metrics;
pub mod nn;
pub mod numerics;
pub mod subspace;
pub mod trainers;

pub use error::{Error, Result};
