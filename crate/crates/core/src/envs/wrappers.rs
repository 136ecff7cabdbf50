use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::{EnvSpec, Environment, Step};
use crate::approx::GaussianPolicy;
use crate::error::check_len;
use crate::rng::Rng;
use crate::Result;

/// Time-averaged reward with Gaussian noise.
///
/// Each raw reward first updates the running variance (using the running mean
/// from before this reward), then the running mean, and the learner receives a
/// draw from `N(mu_r, sigma_r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyRewardState {
    pub mu_r: f64,
    pub var_r: f64,
    pub decay_var: f64,
    pub decay_mean: f64,
    /// Keep `var_r` at its current value (smoothing-only mode).
    pub freeze_variance: bool,
}

impl Default for NoisyRewardState {
    fn default() -> Self {
        Self {
            mu_r: 0.0,
            var_r: 0.0,
            decay_var: libm::pow(0.01, 1.0 / 50.0),
            decay_mean: libm::pow(0.01, 1.0 / 5.0),
            freeze_variance: false,
        }
    }
}

impl NoisyRewardState {
    /// Advance the running statistics by one raw reward without sampling.
    pub fn update(&mut self, raw_r: f64) {
        if !self.freeze_variance {
            let c = self.decay_var;
            let diff = self.mu_r - raw_r;
            self.var_r = c * self.var_r + c * (1.0 - c) * diff * diff;
        }
        let d = self.decay_mean;
        self.mu_r = d * self.mu_r + (1.0 - d) * raw_r;
    }

    pub fn noisy_reward(&mut self, raw_r: f64, rng: &mut Rng) -> f64 {
        self.update(raw_r);
        let z: f64 = StandardNormal.sample(rng);
        self.mu_r + libm::sqrt(self.var_r) * z
    }
}

/// Replaces the task reward with [`NoisyRewardState::noisy_reward`].
pub struct NoisyReward<E> {
    inner: E,
    state: NoisyRewardState,
    rng: Rng,
}

impl<E: Environment> NoisyReward<E> {
    pub fn new(inner: E, seed: u64) -> Self {
        Self {
            inner,
            state: NoisyRewardState::default(),
            rng: Rng::seed_from_u64(seed),
        }
    }

    pub fn reward_state(&self) -> &NoisyRewardState {
        &self.state
    }
}

impl<E: Environment> Environment for NoisyReward<E> {
    fn spec(&self) -> &EnvSpec {
        self.inner.spec()
    }

    fn reset(&mut self, rng: &mut Rng) -> Vec<f64> {
        self.inner.reset(rng)
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        let mut step = self.inner.step(action)?;
        step.reward = self.state.noisy_reward(step.reward, &mut self.rng);
        Ok(step)
    }
}

/// Imitation reward `mean_i exp(-|a_exp_i - a_i|)`, in `(0, 1]`.
pub fn guided_reward(expert_action: &[f64], agent_action: &[f64]) -> Result<f64> {
    check_len("guided reward actions", expert_action.len(), agent_action.len())?;
    if expert_action.is_empty() {
        return Ok(1.0);
    }
    let sum: f64 = expert_action
        .iter()
        .zip(agent_action)
        .map(|(e, a)| libm::exp(-(e - a).abs()))
        .sum();
    Ok(sum / expert_action.len() as f64)
}

/// Replaces the task reward with the imitation reward of an expert policy
/// whose action is sampled at every step.
pub struct GuidedReward<E> {
    inner: E,
    expert: GaussianPolicy,
    rng: Rng,
    last_obs: Vec<f64>,
}

impl<E: Environment> GuidedReward<E> {
    pub fn new(inner: E, expert: GaussianPolicy, seed: u64) -> Result<Self> {
        check_len("expert state dimension", inner.spec().state_dim, expert.state_dim())?;
        check_len("expert action dimension", inner.spec().action_dim, expert.action_dim())?;
        Ok(Self {
            inner,
            expert,
            rng: Rng::seed_from_u64(seed),
            last_obs: Vec::new(),
        })
    }
}

impl<E: Environment> Environment for GuidedReward<E> {
    fn spec(&self) -> &EnvSpec {
        self.inner.spec()
    }

    fn reset(&mut self, rng: &mut Rng) -> Vec<f64> {
        self.last_obs = self.inner.reset(rng);
        self.last_obs.clone()
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        let spec = self.inner.spec();
        let expert_action = self
            .expert
            .sample_action(&self.last_obs, &spec.action_low, &spec.action_high, &mut self.rng)?;
        let mut step = self.inner.step(action)?;
        step.reward = guided_reward(&expert_action, action)?;
        self.last_obs.clone_from(&step.observation);
        Ok(step)
    }
}

/// Boxed trait objects compose with the wrappers.
pub type DynEnv = Box<dyn Environment>;
