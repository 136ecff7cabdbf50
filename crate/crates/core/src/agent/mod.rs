//! Actor-critic training loop with ensemble critics, median targets and
//! Polyak-averaged target networks.
//!
//! One update round on a replayed batch runs, in order:
//! 1. evaluate every critic on `s` and fold the median values into the bounds tracker,
//! 2. build targets `Q = r + gamma * median_k target_k(s') * (1 - done)`,
//! 3. update every critic with the transformed TD error against the shared target,
//! 4. update the policy with the transformed TD error of the median critic,
//! 5. move every target network towards its critic.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand::SeedableRng;

use crate::approx::{clamp_into, GaussianPolicy, Mlp, OptimizerState, Workspace, LOG_STD_MAX, LOG_STD_MIN};
use crate::envs::Environment;
use crate::optimality::{BoundsTracker, OptimalityConfig};
use crate::rng::{Rng, SeedStreams};
use crate::stats::median;
use crate::transforms::{transform, TransformKind};
use crate::{Error, Result};

mod replay;

pub use replay::{ReplayBuffer, Transition};

/// `ln 0.2`: exploration std of at least a tenth of a unit-wide action range.
pub const DEFAULT_MIN_LOG_STD: f64 = -1.609_437_912_434_100_3;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub gamma: f64,
    pub kind: TransformKind,
    /// Sharpness `lambda` of every optimality level.
    pub lambda: f64,
    /// Number of optimality levels `L` (the value range is split into `L + 1` bins).
    pub levels: usize,
    pub bound_epsilon: f64,
    pub bound_horizon: u32,
    pub ensemble_size: usize,
    pub polyak_tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub updates_per_episode: usize,
    pub critic_lr: f64,
    pub actor_lr: f64,
    /// Hidden layer widths shared by critics and the policy mean.
    pub hidden: Vec<usize>,
    pub init_log_std: f64,
    /// Exploration floor: the policy's log-stds never drop below this.
    pub min_log_std: f64,
    /// Multiplies every reward before it is stored for learning.
    pub reward_scale: f64,
    /// Update rounds that train only the critics before the policy starts learning.
    pub actor_warmup: u64,
    /// Squash the policy mean into the action box with `tanh`.
    pub squash_mean: bool,
    /// Coefficient of `0.5 |mean - clamp(mean)|^2` added to the actor loss.
    pub mean_penalty: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            kind: TransformKind::Js,
            lambda: 4.0,
            levels: 4,
            bound_epsilon: BoundsTracker::DEFAULT_EPSILON,
            bound_horizon: BoundsTracker::DEFAULT_HORIZON,
            ensemble_size: 2,
            polyak_tau: 0.01,
            batch_size: 128,
            buffer_capacity: 20_000,
            updates_per_episode: 200,
            critic_lr: 1e-3,
            actor_lr: 3e-4,
            hidden: vec![64, 64],
            init_log_std: 0.0,
            min_log_std: DEFAULT_MIN_LOG_STD,
            reward_scale: 1.0,
            actor_warmup: 0,
            squash_mean: false,
            mean_penalty: 0.0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig("gamma must lie in [0, 1)"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig("lambda must be positive"));
        }
        if self.levels == 0 {
            return Err(Error::InvalidConfig("levels must be at least 1"));
        }
        if self.ensemble_size == 0 {
            return Err(Error::InvalidConfig("ensemble_size must be at least 1"));
        }
        if !(self.polyak_tau > 0.0 && self.polyak_tau <= 1.0) {
            return Err(Error::InvalidConfig("polyak_tau must lie in (0, 1]"));
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return Err(Error::InvalidConfig("batch_size and buffer_capacity must be positive"));
        }
        if !(self.critic_lr > 0.0 && self.actor_lr > 0.0) {
            return Err(Error::InvalidConfig("learning rates must be positive"));
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return Err(Error::InvalidConfig("reward_scale must be positive"));
        }
        if !(LOG_STD_MIN..=LOG_STD_MAX).contains(&self.min_log_std) {
            return Err(Error::InvalidConfig("min_log_std must lie within the policy's log-std range"));
        }
        if !(self.mean_penalty >= 0.0 && self.mean_penalty.is_finite()) {
            return Err(Error::InvalidConfig("mean_penalty must be non-negative"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden layer widths must be positive"));
        }
        BoundsTracker::new(self.bound_epsilon, self.bound_horizon)?;
        Ok(())
    }

    fn layer_sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(&self.hidden);
        sizes.push(output);
        sizes
    }
}

/// Bootstrapped target of one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdTarget {
    /// Median target-network value of `s'` (zero for terminal transitions).
    pub v_next: f64,
    /// `r + gamma * v_next`.
    pub q: f64,
}

/// Median-of-ensemble bootstrapped targets. The target networks are only read.
pub fn td_target(batch: &[Transition], target_critics: &[Mlp], gamma: f64) -> Result<Vec<TdTarget>> {
    if target_critics.is_empty() {
        return Err(Error::InvalidConfig("at least one target critic is required"));
    }
    let mut workspaces: Vec<Workspace> = target_critics.iter().map(Workspace::new).collect();
    let mut values = vec![0.0; target_critics.len()];
    batch
        .iter()
        .map(|t| {
            let v_next = if t.done {
                0.0
            } else {
                for ((net, ws), v) in target_critics.iter().zip(&mut workspaces).zip(&mut values) {
                    crate::error::check_len("next state", net.input_dim(), t.next_state.len())?;
                    *v = net.forward_into(&t.next_state, ws)[0];
                }
                median(&values)
            };
            Ok(TdTarget {
                v_next,
                q: t.reward + gamma * v_next,
            })
        })
        .collect()
}

/// `target <- (1 - tau) target + tau main`, elementwise.
pub fn polyak_update(main: &[f64], target: &mut [f64], tau: f64) -> Result<()> {
    crate::error::check_len("Polyak parameters", main.len(), target.len())?;
    if tau == 1.0 {
        target.copy_from_slice(main);
        return Ok(());
    }
    for (t, m) in target.iter_mut().zip(main) {
        *t = (1.0 - tau) * *t + tau * m;
    }
    Ok(())
}

/// A replayed batch with everything the critic and actor updates share.
#[derive(Debug, Clone)]
pub struct PreparedBatch {
    pub transitions: Vec<Transition>,
    pub targets: Vec<TdTarget>,
    /// Median over the main critics of `V(s)`; the value fed to every transform.
    pub v_median: Vec<f64>,
    /// Optimality geometry after this batch's bound update.
    pub optimality: OptimalityConfig,
    /// Transformed TD error of the median critic, used by the actor.
    pub weights: Vec<f64>,
}

/// Diagnostics of one critic or actor update.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStats {
    pub mean_abs_weight: f64,
    /// Per-sample transformed TD error that multiplied the gradient.
    pub weights: Vec<f64>,
}

impl UpdateStats {
    fn from_weights(weights: Vec<f64>) -> Self {
        let mean_abs_weight = weights.iter().map(|w| w.abs()).sum::<f64>() / weights.len().max(1) as f64;
        Self {
            mean_abs_weight,
            weights,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    /// Undiscounted sum of task rewards.
    pub task_return: f64,
    /// Undiscounted sum of the rewards the learner saw.
    pub learner_return: f64,
    pub steps: usize,
    pub updates: usize,
    /// Mean over update rounds of the actor's mean |transformed TD error|.
    pub mean_abs_weight: f64,
}

#[derive(Debug, Clone)]
pub struct Agent {
    cfg: AgentConfig,
    critics: Vec<Mlp>,
    targets: Vec<Mlp>,
    critic_opts: Vec<OptimizerState>,
    policy: GaussianPolicy,
    policy_opt: OptimizerState,
    buffer: ReplayBuffer,
    tracker: BoundsTracker,
    action_rng: Rng,
    action_low: Vec<f64>,
    action_high: Vec<f64>,
    episodes: u64,
    updates: u64,
}

impl Agent {
    /// Fresh agent for an environment with the given interface. Critics,
    /// targets and policy are initialised from `seeds.init`, replay sampling
    /// uses `seeds.buffer` and exploration noise `seeds.policy`.
    pub fn new(cfg: AgentConfig, state_dim: usize, action_low: &[f64], action_high: &[f64], seeds: SeedStreams) -> Result<Self> {
        cfg.validate()?;
        crate::error::check_len("action bounds", action_low.len(), action_high.len())?;
        let action_dim = action_low.len();
        let mut init = Rng::seed_from_u64(seeds.init);
        let critic_sizes = cfg.layer_sizes(state_dim, 1);
        let critics = (0..cfg.ensemble_size)
            .map(|_| Mlp::new(&critic_sizes, &mut init))
            .collect::<Result<Vec<_>>>()?;
        let mut policy = GaussianPolicy::new(&cfg.layer_sizes(state_dim, action_dim), cfg.init_log_std, &mut init)?;
        if cfg.squash_mean {
            policy = policy.with_mean_box(action_low, action_high)?;
        }
        Self::from_parts(cfg, critics.clone(), critics, policy, action_low, action_high, seeds)
    }

    /// Agent around existing networks (e.g. restored from a checkpoint).
    /// Optimizer moments start from zero.
    pub fn from_parts(
        cfg: AgentConfig,
        critics: Vec<Mlp>,
        targets: Vec<Mlp>,
        policy: GaussianPolicy,
        action_low: &[f64],
        action_high: &[f64],
        seeds: SeedStreams,
    ) -> Result<Self> {
        cfg.validate()?;
        crate::error::check_len("ensemble", cfg.ensemble_size, critics.len())?;
        crate::error::check_len("target ensemble", critics.len(), targets.len())?;
        crate::error::check_len("action bounds", policy.action_dim(), action_low.len())?;
        crate::error::check_len("action bounds", action_low.len(), action_high.len())?;
        for (c, t) in critics.iter().zip(&targets) {
            crate::error::check_len("critic output", 1, c.output_dim())?;
            crate::error::check_len("critic input", policy.state_dim(), c.input_dim())?;
            crate::error::check_len("target critic parameters", c.num_params(), t.num_params())?;
        }
        let critic_opts = critics.iter().map(|c| OptimizerState::new(c.num_params(), cfg.critic_lr)).collect();
        let policy_opt = OptimizerState::new(policy.num_params(), cfg.actor_lr);
        Ok(Self {
            buffer: ReplayBuffer::new(cfg.buffer_capacity, seeds.buffer)?,
            tracker: BoundsTracker::new(cfg.bound_epsilon, cfg.bound_horizon)?,
            action_rng: Rng::seed_from_u64(seeds.policy),
            action_low: action_low.to_vec(),
            action_high: action_high.to_vec(),
            cfg,
            critics,
            targets,
            critic_opts,
            policy,
            policy_opt,
            episodes: 0,
            updates: 0,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn critics(&self) -> &[Mlp] {
        &self.critics
    }

    pub fn critics_mut(&mut self) -> &mut [Mlp] {
        &mut self.critics
    }

    pub fn target_critics(&self) -> &[Mlp] {
        &self.targets
    }

    pub fn policy(&self) -> &GaussianPolicy {
        &self.policy
    }

    pub fn policy_mut(&mut self) -> &mut GaussianPolicy {
        &mut self.policy
    }

    pub fn tracker(&self) -> &BoundsTracker {
        &self.tracker
    }

    /// Replace the bounds tracker, e.g. when resuming from a checkpoint.
    pub fn set_tracker(&mut self, tracker: BoundsTracker) {
        self.tracker = tracker;
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn buffer_mut(&mut self) -> &mut ReplayBuffer {
        &mut self.buffer
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn action_bounds(&self) -> (&[f64], &[f64]) {
        (&self.action_low, &self.action_high)
    }

    /// Exploratory action sample, not yet clamped into the action box.
    ///
    /// Replay stores this raw sample so that the score function is evaluated
    /// at the point that was actually drawn; the environment receives the
    /// clamped version.
    pub fn act(&mut self, state: &[f64]) -> Result<Vec<f64>> {
        self.policy.sample(state, &mut self.action_rng)
    }

    /// Mean of the policy, clamped into the action box.
    pub fn act_greedy(&self, state: &[f64]) -> Result<Vec<f64>> {
        greedy_action(&self.policy, state, &self.action_low, &self.action_high)
    }

    /// Median critic value of `s` for every transition in `batch`.
    pub fn median_values(&self, batch: &[Transition]) -> Result<Vec<f64>> {
        let mut workspaces: Vec<Workspace> = self.critics.iter().map(Workspace::new).collect();
        let mut values = vec![0.0; self.critics.len()];
        batch
            .iter()
            .map(|t| {
                crate::error::check_len("state", self.policy.state_dim(), t.state.len())?;
                for ((net, ws), v) in self.critics.iter().zip(&mut workspaces).zip(&mut values) {
                    *v = net.forward_into(&t.state, ws)[0];
                }
                Ok(median(&values))
            })
            .collect()
    }

    /// Bound update, targets and actor weights for one replayed batch.
    pub fn prepare_batch(&mut self, transitions: Vec<Transition>) -> Result<PreparedBatch> {
        let v_median = self.median_values(&transitions)?;
        self.tracker.update(&v_median)?;
        let optimality = self.tracker.config(self.cfg.lambda, self.cfg.levels)?;
        let targets = td_target(&transitions, &self.targets, self.cfg.gamma)?;
        let weights = targets
            .iter()
            .zip(&v_median)
            .map(|(t, &v)| transform(self.cfg.kind, t.q - v, v, &optimality))
            .collect();
        Ok(PreparedBatch {
            transitions,
            targets,
            v_median,
            optimality,
            weights,
        })
    }

    /// One optimizer step of critic `index`: descend
    /// `mean_i -w_i grad V_k(s_i)` with `w_i = transform(q_i - V_k(s_i), V_med(s_i))`.
    pub fn critic_update(&mut self, batch: &PreparedBatch, index: usize) -> Result<UpdateStats> {
        let net = self
            .critics
            .get(index)
            .ok_or(Error::InvalidConfig("critic index out of range"))?;
        let mut ws = Workspace::new(net);
        let mut grad = vec![0.0; net.num_params()];
        let n = batch.transitions.len() as f64;
        let mut weights = Vec::with_capacity(batch.transitions.len());
        for ((t, target), &v_med) in batch.transitions.iter().zip(&batch.targets).zip(&batch.v_median) {
            let v = net.forward_into(&t.state, &mut ws)[0];
            let w = transform(self.cfg.kind, target.q - v, v_med, &batch.optimality);
            net.backward(&mut ws, &[1.0], -w / n, &mut grad);
            weights.push(w);
        }
        self.critic_opts[index].apply_update(self.critics[index].params_mut(), &grad)?;
        Ok(UpdateStats::from_weights(weights))
    }

    /// One optimizer step of the policy: descend `mean_i -w_i grad ln pi(a_i | s_i)`
    /// with the batch's shared weights.
    pub fn actor_update(&mut self, batch: &PreparedBatch) -> Result<UpdateStats> {
        let mut ws = Workspace::new(self.policy.mean_net());
        let mut grad = vec![0.0; self.policy.num_params()];
        let n = batch.transitions.len() as f64;
        for (t, &w) in batch.transitions.iter().zip(&batch.weights) {
            crate::error::check_len("action", self.policy.action_dim(), t.action.len())?;
            if w != 0.0 {
                self.policy
                    .accumulate_log_prob_grad(&mut ws, &t.state, &t.action, -w / n, &mut grad);
            }
            if self.cfg.mean_penalty > 0.0 {
                self.policy.accumulate_box_penalty_grad(
                    &mut ws,
                    &t.state,
                    &self.action_low,
                    &self.action_high,
                    self.cfg.mean_penalty / n,
                    &mut grad,
                );
            }
        }
        self.policy.apply_update(&grad, &mut self.policy_opt)?;
        self.policy.clamp_log_std(self.cfg.min_log_std, LOG_STD_MAX);
        Ok(UpdateStats::from_weights(batch.weights.clone()))
    }

    /// Move every target network towards its critic.
    pub fn update_targets(&mut self) -> Result<()> {
        for (main, target) in self.critics.iter().zip(&mut self.targets) {
            polyak_update(main.params(), target.params_mut(), self.cfg.polyak_tau)?;
        }
        Ok(())
    }

    /// Full update round on one batch sampled from the replay buffer. Returns
    /// the actor's mean |transformed TD error|.
    pub fn update_round(&mut self) -> Result<f64> {
        let idx = self.buffer.sample_indices(self.cfg.batch_size)?;
        let transitions = idx
            .into_iter()
            .filter_map(|i| self.buffer.get(i).cloned())
            .collect();
        let batch = self.prepare_batch(transitions)?;
        for k in 0..self.critics.len() {
            self.critic_update(&batch, k)?;
        }
        let mean_abs_weight = if self.updates >= self.cfg.actor_warmup {
            self.actor_update(&batch)?.mean_abs_weight
        } else {
            UpdateStats::from_weights(batch.weights).mean_abs_weight
        };
        self.update_targets()?;
        self.updates += 1;
        Ok(mean_abs_weight)
    }

    /// Interact for one episode, store its transitions, then run
    /// `updates_per_episode` update rounds.
    pub fn run_episode<E: Environment + ?Sized>(&mut self, env: &mut E, env_rng: &mut Rng) -> Result<EpisodeStats> {
        let cap = env.spec().max_steps;
        let mut stats = EpisodeStats {
            task_return: 0.0,
            learner_return: 0.0,
            steps: 0,
            updates: 0,
            mean_abs_weight: 0.0,
        };
        if cap > 0 {
            let mut state = env.reset(env_rng);
            while stats.steps < cap {
                let action = self.act(&state)?;
                let mut applied = action.clone();
                clamp_into(&mut applied, &self.action_low, &self.action_high);
                let step = env.step(&applied)?;
                stats.task_return += step.task_reward;
                stats.learner_return += step.reward;
                stats.steps += 1;
                let done = step.done();
                self.buffer.push(Transition {
                    state,
                    action,
                    reward: self.cfg.reward_scale * step.reward,
                    next_state: step.observation.clone(),
                    done: step.terminated,
                });
                if done {
                    break;
                }
                state = step.observation;
            }
        }
        self.episodes += 1;
        if !self.buffer.is_empty() {
            let mut total = 0.0;
            for _ in 0..self.cfg.updates_per_episode {
                total += self.update_round()?;
                stats.updates += 1;
            }
            if stats.updates > 0 {
                stats.mean_abs_weight = total / stats.updates as f64;
            }
        }
        Ok(stats)
    }
}

pub fn greedy_action(policy: &GaussianPolicy, state: &[f64], low: &[f64], high: &[f64]) -> Result<Vec<f64>> {
    let mut a = policy.mean(state)?;
    clamp_into(&mut a, low, high);
    Ok(a)
}

/// Task returns of `episodes` runs of the clamped policy mean.
pub fn evaluate_policy<E: Environment + ?Sized>(
    policy: &GaussianPolicy,
    env: &mut E,
    episodes: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    crate::error::check_len("policy state dimension", env.spec().state_dim, policy.state_dim())?;
    crate::error::check_len("policy action dimension", env.spec().action_dim, policy.action_dim())?;
    let (low, high) = (env.spec().action_low.clone(), env.spec().action_high.clone());
    (0..episodes)
        .map(|_| run_controller(env, rng, |s| greedy_action(policy, s, &low, &high)))
        .collect()
}

/// Task return of one episode driven by `controller`.
pub fn run_controller<E, F>(env: &mut E, rng: &mut Rng, mut controller: F) -> Result<f64>
where
    E: Environment + ?Sized,
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let cap = env.spec().max_steps;
    let mut total = 0.0;
    if cap == 0 {
        return Ok(total);
    }
    let mut state = env.reset(rng);
    for _ in 0..cap {
        let action = controller(&state)?;
        let step = env.step(&action)?;
        total += step.task_reward;
        if step.done() {
            break;
        }
        state = step.observation;
    }
    Ok(total)
}

/// Task return of one episode with actions drawn uniformly from the action box.
pub fn random_policy_return<E: Environment + ?Sized>(env: &mut E, rng: &mut Rng) -> Result<f64> {
    let (low, high) = (env.spec().action_low.clone(), env.spec().action_high.clone());
    let mut action_rng = Rng::seed_from_u64(rng.random());
    run_controller(env, rng, |_| {
        Ok(low
            .iter()
            .zip(&high)
            .map(|(&lo, &hi)| action_rng.random_range(lo..=hi))
            .collect())
    })
}

#[cfg(test)]
mod tests;
