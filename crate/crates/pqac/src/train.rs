use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pqac_core::agent::{evaluate_policy, Agent};
use pqac_core::approx::GaussianPolicy;
use pqac_core::rng::{Rng, SeedStreams};
use pqac_core::stats::interquartile_mean;
use rand::SeedableRng;

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::envs::training_env;
use crate::error::{HarnessError, Result};
use crate::metrics::{write_metrics, MetricsHeader, MetricsRow};

pub fn run_id(condition: &str, seed: u64) -> String {
    format!("{condition}-s{seed}")
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub run_id: String,
    pub rows: Vec<MetricsRow>,
    /// Interquartile mean of the last evaluation; `None` when no episode ran.
    pub final_eval: Option<f64>,
    pub agent: Agent,
}

/// Where a seed run writes its checkpoints.
#[derive(Debug, Clone, Copy)]
pub enum Checkpoints<'a> {
    None,
    /// `<dir>/final` at the end and `<dir>/quarter` after a quarter of the budget.
    Dir(&'a Path),
}

/// Train one seed to budget. Deterministic given `cfg`, `seed` and `expert`.
pub fn train_seed(cfg: &RunConfig, seed: u64, expert: Option<&GaussianPolicy>, checkpoints: Checkpoints) -> Result<SeedRun> {
    let streams = SeedStreams::split(seed);
    let mut env = training_env(
        cfg.env.name,
        cfg.env.max_steps,
        cfg.env.noisy_reward,
        expert.cloned(),
        streams.wrapper,
    )?;
    let mut eval_env = cfg.env.name.build(cfg.env.max_steps);
    let spec = env.spec().clone();
    let mut agent = Agent::new(cfg.agent_config(), spec.state_dim, &spec.action_low, &spec.action_high, streams)?;
    let mut env_rng = Rng::seed_from_u64(streams.env);
    let mut eval_rng = Rng::seed_from_u64(streams.eval);
    let run_id = run_id(&cfg.run.condition, seed);
    let episodes = cfg.run.episodes;
    let quarter = episodes / 4;
    let start = Instant::now();
    let mut rows = Vec::with_capacity(episodes);
    let mut final_eval = None;

    for episode in 0..episodes {
        let stats = agent.run_episode(env.as_mut(), &mut env_rng)?;
        let eval_iqm = if (episode + 1) % cfg.run.eval_every == 0 || episode + 1 == episodes {
            let returns = evaluate_policy(agent.policy(), eval_env.as_mut(), cfg.run.eval_episodes, &mut eval_rng)?;
            let iqm = interquartile_mean(&returns)?;
            final_eval = Some(iqm);
            Some(iqm)
        } else {
            None
        };
        rows.push(MetricsRow {
            run_id: run_id.clone(),
            seed,
            episode,
            train_return: stats.task_return,
            eval_iqm,
            mean_abs_weight: stats.mean_abs_weight,
            bound_lo: agent.tracker().bound_lo(),
            bound_hi: agent.tracker().bound_hi(),
            wall_clock_ms: cfg.run.wall_clock.then(|| start.elapsed().as_millis() as u64),
        });
        if let Checkpoints::Dir(dir) = checkpoints {
            if quarter > 0 && episode + 1 == quarter {
                Checkpoint::save(&dir.join("quarter"), &agent, cfg, seed)?;
            }
        }
    }
    if let Checkpoints::Dir(dir) = checkpoints {
        Checkpoint::save(&dir.join("final"), &agent, cfg, seed)?;
    }
    Ok(SeedRun {
        seed,
        run_id,
        rows,
        final_eval,
        agent,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub run_id: String,
    pub final_eval: Option<f64>,
    pub dir: PathBuf,
}

/// Load the expert named by `env.guided_expert`, if any.
pub fn load_expert(cfg: &RunConfig) -> Result<Option<GaussianPolicy>> {
    let Some(dir) = &cfg.env.guided_expert else {
        return Ok(None);
    };
    let (meta, policy) = Checkpoint::load_policy(dir)?;
    if meta.env != cfg.env.name {
        return Err(HarnessError::Mismatch {
            path: dir.clone(),
            message: format!("expert was trained on {}, config asks for {}", meta.env, cfg.env.name),
        });
    }
    Ok(Some(policy))
}

/// Train every seed of `cfg` into `out_dir`:
/// `<out>/<run_id>/metrics.csv`, `<out>/<run_id>/{quarter,final}/` and the
/// merged `<out>/metrics.csv` (rows in seed-list order).
pub fn train_all(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<RunSummary>> {
    let expert = load_expert(cfg)?;
    fs::create_dir_all(out_dir).map_err(HarnessError::io(out_dir))?;
    let header = MetricsHeader {
        condition: cfg.run.condition.clone(),
        env: cfg.env.name.to_string(),
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut results: Vec<Result<(RunSummary, Vec<MetricsRow>)>> = Vec::with_capacity(cfg.run.seeds.len());
    for chunk in cfg.run.seeds.chunks(workers) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&seed| {
                    let (expert, header) = (expert.as_ref(), &header);
                    scope.spawn(move || {
                        let dir = out_dir.join(run_id(&cfg.run.condition, seed));
                        fs::create_dir_all(&dir).map_err(HarnessError::io(&dir))?;
                        let run = train_seed(cfg, seed, expert, Checkpoints::Dir(&dir))?;
                        write_metrics(&dir.join("metrics.csv"), header, &run.rows)?;
                        let summary = RunSummary {
                            seed,
                            run_id: run.run_id,
                            final_eval: run.final_eval,
                            dir,
                        };
                        Ok((summary, run.rows))
                    })
                })
                .collect();
            results.extend(handles.into_iter().map(|h| h.join().expect("training thread panicked")));
        });
    }
    let mut summaries = Vec::with_capacity(results.len());
    let mut merged = Vec::new();
    for result in results {
        let (summary, rows) = result?;
        summaries.push(summary);
        merged.extend(rows);
    }
    write_metrics(&out_dir.join("metrics.csv"), &header, &merged)?;
    Ok(summaries)
}
