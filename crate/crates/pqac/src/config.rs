//! Run configuration: a TOML file of dotted keys such as `agent.gamma = 0.99`.
//!
//! Every section is optional and falls back to the desk-scale defaults.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use pqac_core::agent::AgentConfig;
use pqac_core::approx::{LOG_STD_MAX, LOG_STD_MIN};
use pqac_core::TransformKind;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::envs::EnvName;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub env: EnvSection,
    pub agent: AgentSection,
    pub optimality: OptimalitySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Label written into metrics headers and run ids; profiles group runs by it.
    pub condition: String,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    pub eval_episodes: usize,
    /// Evaluate after every `eval_every`-th episode and after the last one.
    pub eval_every: usize,
    pub out_dir: PathBuf,
    /// Fill the wall-clock column. Off by default so metrics files stay byte-identical.
    pub wall_clock: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            condition: "pqac".into(),
            seeds: vec![0],
            episodes: 150,
            eval_episodes: 10,
            eval_every: 10,
            out_dir: PathBuf::from("runs"),
            wall_clock: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub name: EnvName,
    pub max_steps: usize,
    pub noisy_reward: bool,
    /// Checkpoint directory of an expert whose actions define the imitation reward.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guided_expert: Option<PathBuf>,
}

impl Default for EnvSection {
    fn default() -> Self {
        Self {
            name: EnvName::Pendulum,
            max_steps: 200,
            noisy_reward: false,
            guided_expert: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSection {
    pub gamma: f64,
    #[serde(serialize_with = "ser_kind", deserialize_with = "de_kind")]
    pub transform: TransformKind,
    pub ensemble_size: usize,
    pub polyak_tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub updates_per_episode: usize,
    pub critic_lr: f64,
    pub actor_lr: f64,
    pub hidden: Vec<usize>,
    pub init_log_std: f64,
    pub min_log_std: f64,
    pub reward_scale: f64,
    pub actor_warmup: u64,
    pub squash_mean: bool,
    pub mean_penalty: f64,
}

impl Default for AgentSection {
    fn default() -> Self {
        let d = AgentConfig::default();
        Self {
            gamma: d.gamma,
            transform: d.kind,
            ensemble_size: d.ensemble_size,
            polyak_tau: d.polyak_tau,
            batch_size: d.batch_size,
            buffer_capacity: d.buffer_capacity,
            updates_per_episode: d.updates_per_episode,
            critic_lr: d.critic_lr,
            actor_lr: d.actor_lr,
            hidden: d.hidden,
            init_log_std: d.init_log_std,
            min_log_std: d.min_log_std,
            reward_scale: d.reward_scale,
            actor_warmup: d.actor_warmup,
            squash_mean: d.squash_mean,
            mean_penalty: d.mean_penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimalitySection {
    pub lambda: f64,
    /// Number of levels `L`; the tracked value range is split into `L + 1` bins.
    pub levels: usize,
    pub epsilon: f64,
    pub horizon: u32,
}

impl Default for OptimalitySection {
    fn default() -> Self {
        let d = AgentConfig::default();
        Self {
            lambda: d.lambda,
            levels: d.levels,
            epsilon: d.bound_epsilon,
            horizon: d.bound_horizon,
        }
    }
}

fn ser_kind<S: Serializer>(kind: &TransformKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(kind.name())
}

fn de_kind<'de, D: Deserializer<'de>>(d: D) -> Result<TransformKind, D::Error> {
    let name = String::deserialize(d)?;
    name.parse().map_err(serde::de::Error::custom)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config {
            path: path.to_path_buf(),
            line: None,
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text, path)
    }

    /// Parse and validate. `path` is only used in error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let config_error = |line, message| HarnessError::Config {
            path: path.to_path_buf(),
            line,
            message,
        };
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|span| line_of_offset(text, span.start));
            config_error(line, e.message().trim().to_string())
        })?;
        cfg.validate()
            .map_err(|(key, message)| config_error(line_of_key(text, key), format!("{key}: {message}")))?;
        Ok(cfg)
    }

    /// Range checks. Errors carry the dotted key at fault.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.run.condition.is_empty() || self.run.condition.contains([',', '\n', '/', '\\']) {
            return Err(("run.condition", "must be non-empty without ',', '/' or newlines".into()));
        }
        if self.run.seeds.is_empty() {
            return Err(("run.seeds", "at least one seed is required".into()));
        }
        if self.run.seeds.iter().any(|&s| s > i64::MAX as u64) {
            return Err(("run.seeds", "seeds must fit in a signed 64-bit integer".into()));
        }
        if self.run.eval_every == 0 {
            return Err(("run.eval_every", "must be at least 1".into()));
        }
        if self.run.eval_episodes == 0 {
            return Err(("run.eval_episodes", "must be at least 1".into()));
        }
        if self.env.max_steps == 0 {
            return Err(("env.max_steps", "must be at least 1".into()));
        }
        let agent = self.agent_config();
        agent.validate().map_err(|e| (agent_key(&agent), e.to_string()))
    }

    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            gamma: self.agent.gamma,
            kind: self.agent.transform,
            lambda: self.optimality.lambda,
            levels: self.optimality.levels,
            bound_epsilon: self.optimality.epsilon,
            bound_horizon: self.optimality.horizon,
            ensemble_size: self.agent.ensemble_size,
            polyak_tau: self.agent.polyak_tau,
            batch_size: self.agent.batch_size,
            buffer_capacity: self.agent.buffer_capacity,
            updates_per_episode: self.agent.updates_per_episode,
            critic_lr: self.agent.critic_lr,
            actor_lr: self.agent.actor_lr,
            hidden: self.agent.hidden.clone(),
            init_log_std: self.agent.init_log_std,
            min_log_std: self.agent.min_log_std,
            reward_scale: self.agent.reward_scale,
            actor_warmup: self.agent.actor_warmup,
            squash_mean: self.agent.squash_mean,
            mean_penalty: self.agent.mean_penalty,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

/// The first key that fails the agent's range checks, for error locations.
fn agent_key(a: &AgentConfig) -> &'static str {
    let checks: [(&'static str, bool); 13] = [
        ("agent.gamma", (0.0..1.0).contains(&a.gamma)),
        ("optimality.lambda", a.lambda > 0.0 && a.lambda.is_finite()),
        ("optimality.levels", a.levels > 0),
        ("agent.ensemble_size", a.ensemble_size > 0),
        ("agent.polyak_tau", a.polyak_tau > 0.0 && a.polyak_tau <= 1.0),
        ("agent.batch_size", a.batch_size > 0),
        ("agent.buffer_capacity", a.buffer_capacity > 0),
        ("agent.critic_lr", a.critic_lr > 0.0),
        ("agent.actor_lr", a.actor_lr > 0.0),
        ("agent.hidden", a.hidden.iter().all(|&h| h > 0)),
        ("agent.reward_scale", a.reward_scale > 0.0 && a.reward_scale.is_finite()),
        ("agent.min_log_std", (LOG_STD_MIN..=LOG_STD_MAX).contains(&a.min_log_std)),
        ("optimality.epsilon", a.bound_epsilon > 0.0 && a.bound_epsilon < 1.0),
    ];
    checks
        .iter()
        .find(|(_, ok)| !ok)
        .map(|(k, _)| *k)
        .unwrap_or("optimality.horizon")
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// 1-based line defining `section.key`, written either as a dotted key or
/// inside a `[section]` table.
fn line_of_key(text: &str, dotted: &str) -> Option<usize> {
    let (section, key) = dotted.split_once('.')?;
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else {
            continue;
        };
        let lhs: String = lhs.split('.').map(str::trim).collect::<Vec<_>>().join(".");
        let full = if current.is_empty() { lhs } else { format!("{current}.{lhs}") };
        if full == dotted || (current == section && full.ends_with(&format!(".{key}"))) {
            return Some(i + 1);
        }
    }
    None
}
