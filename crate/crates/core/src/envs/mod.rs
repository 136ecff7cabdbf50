//! Desk-scale continuous-control tasks and reward wrappers.
//!
//! Every environment is deterministic given the reset generator and the action
//! sequence.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::rng::Rng;
use crate::Result;

mod pendulum;
mod pointmass;
mod wrappers;

pub use pendulum::{pendulum_step, Pendulum, PendulumParams, PendulumState};
pub use pointmass::{pointmass_step, PointMass, PointMassParams, PointMassState};
pub use wrappers::{guided_reward, DynEnv, GuidedReward, NoisyReward, NoisyRewardState};

/// Static description of an environment's interface.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: &'static str,
    pub state_dim: usize,
    pub action_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub max_steps: usize,
    pub dt: f64,
}

/// Result of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Vec<f64>,
    /// Reward seen by the learner (possibly replaced by a wrapper).
    pub reward: f64,
    /// Reward of the underlying task, before any wrapper.
    pub task_reward: f64,
    /// True terminal state: no bootstrapping past it.
    pub terminated: bool,
    /// Episode cut by the step limit; the next state still bootstraps.
    pub truncated: bool,
}

impl Step {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

pub trait Environment {
    fn spec(&self) -> &EnvSpec;

    /// Start a new episode, drawing the initial state from `rng`.
    fn reset(&mut self, rng: &mut Rng) -> Vec<f64>;

    fn step(&mut self, action: &[f64]) -> Result<Step>;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn spec(&self) -> &EnvSpec {
        (**self).spec()
    }

    fn reset(&mut self, rng: &mut Rng) -> Vec<f64> {
        (**self).reset(rng)
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        (**self).step(action)
    }
}
