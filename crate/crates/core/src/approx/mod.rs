//! Hand-differentiated function approximators and their optimizer.

mod mlp;
mod optim;
mod policy;

pub use mlp::{Mlp, Workspace};
pub use optim::OptimizerState;
pub use policy::{clamp_into, GaussianPolicy, LOG_STD_MAX, LOG_STD_MIN};
