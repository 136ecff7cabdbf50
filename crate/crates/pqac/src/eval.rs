use std::path::Path;

use pqac_core::agent::evaluate_policy;
use pqac_core::rng::{Rng, SeedStreams};
use pqac_core::stats::interquartile_mean;
use rand::SeedableRng;

use crate::checkpoint::Checkpoint;
use crate::envs::EnvName;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub returns: Vec<f64>,
    pub iqm: f64,
}

/// Run the checkpoint's policy mean for `episodes` episodes of `env`.
/// Start states come from the eval stream of `seed`.
pub fn eval_checkpoint(dir: &Path, env: EnvName, episodes: usize, seed: u64) -> Result<EvalReport> {
    if episodes == 0 {
        return Err(HarnessError::Usage("--episodes must be at least 1".into()));
    }
    let (meta, policy) = Checkpoint::load_policy(dir)?;
    if meta.env != env {
        return Err(HarnessError::Mismatch {
            path: dir.to_path_buf(),
            message: format!("trained on {}, asked to evaluate on {env}", meta.env),
        });
    }
    let mut env = env.build(meta.config.env.max_steps);
    let mut rng = Rng::seed_from_u64(SeedStreams::split(seed).eval);
    let returns = evaluate_policy(&policy, env.as_mut(), episodes, &mut rng)?;
    let iqm = interquartile_mean(&returns)?;
    Ok(EvalReport { returns, iqm })
}
