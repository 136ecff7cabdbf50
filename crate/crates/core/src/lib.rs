//! Pseudo-quantized actor-critic (PQAC) learning rules.
//!
//! This crate holds everything that does not touch the file system: the
//! numerically stable scalar primitives, the sigmoid optimality model with its
//! multi-level geometry and running bound estimate, the nonlinear TD-error
//! transforms, small hand-differentiated approximators, the desk-scale
//! environments with their reward wrappers, and the actor-critic update loop.
//!
//! It is `no_std` and only needs `alloc`. File formats, configuration and the
//! command line live in the `pqac` companion crate.

#![no_std]

extern crate alloc;

pub mod agent;
pub mod approx;
pub mod envs;
mod error;
pub mod optimality;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod transforms;

pub use error::{Error, Result};
pub use optimality::{BoundsTracker, OptimalityConfig};
pub use transforms::{Decomposition, TransformKind};
