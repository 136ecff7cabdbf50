use std::fmt;
use std::str::FromStr;

use pqac_core::approx::GaussianPolicy;
use pqac_core::envs::{DynEnv, GuidedReward, NoisyReward, Pendulum, PointMass};
use pqac_core::rng::splitmix64;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvName {
    Pendulum,
    #[serde(alias = "point-mass", alias = "point_mass")]
    PointMass,
}

impl EnvName {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvName::Pendulum => Pendulum::NAME,
            EnvName::PointMass => PointMass::NAME,
        }
    }

    /// The bare task, without reward wrappers.
    pub fn build(self, max_steps: usize) -> DynEnv {
        match self {
            EnvName::Pendulum => Box::new(Pendulum::new(max_steps)),
            EnvName::PointMass => Box::new(PointMass::new(max_steps)),
        }
    }
}

impl fmt::Display for EnvName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pendulum" => Ok(EnvName::Pendulum),
            "pointmass" | "point-mass" | "point_mass" => Ok(EnvName::PointMass),
            other => Err(format!("unknown environment `{other}` (expected pendulum or pointmass)")),
        }
    }
}

/// Training environment: the task, optionally with its reward replaced by
/// the imitation reward of `expert`, optionally with reward noise on top.
pub fn training_env(
    name: EnvName,
    max_steps: usize,
    noisy_reward: bool,
    expert: Option<GaussianPolicy>,
    wrapper_seed: u64,
) -> Result<DynEnv> {
    let mut env = name.build(max_steps);
    if let Some(expert) = expert {
        env = Box::new(GuidedReward::new(env, expert, splitmix64(wrapper_seed))?);
    }
    if noisy_reward {
        env = Box::new(NoisyReward::new(env, wrapper_seed));
    }
    Ok(env)
}
