//! Checkpoint directories.
//!
//! ```text
//! <dir>/meta.toml        config echo and counters
//! <dir>/policy.params    policy mean network followed by the log-stds
//! <dir>/critic_<k>.params
//! <dir>/target_<k>.params
//! ```
//!
//! A `.params` file is plain text: a version line, `key = value` header
//! lines, a blank line, then one value per line in the network's flat layer
//! order. Values are written in Rust's shortest round-trip notation, so a
//! save/load cycle is bit-exact. A policy whose mean is squashed into a box
//! carries `mean_low` / `mean_high` header lines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pqac_core::agent::Agent;
use pqac_core::approx::{GaussianPolicy, Mlp};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::envs::EnvName;
use crate::error::{HarnessError, Result};

const PARAMS_VERSION: &str = "# pqac-params v1";
const META_FORMAT: &str = "pqac-checkpoint v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Mlp,
    GaussianPolicy,
}

impl ParamKind {
    fn as_str(self) -> &'static str {
        match self {
            ParamKind::Mlp => "mlp",
            ParamKind::GaussianPolicy => "gaussian-policy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamFile {
    pub kind: ParamKind,
    pub layer_sizes: Vec<usize>,
    pub seed: u64,
    pub mean_box: Option<(Vec<f64>, Vec<f64>)>,
    pub values: Vec<f64>,
}

fn render_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

impl ParamFile {
    pub fn from_mlp(net: &Mlp, seed: u64) -> Self {
        Self {
            kind: ParamKind::Mlp,
            layer_sizes: net.layer_sizes().to_vec(),
            seed,
            mean_box: None,
            values: net.params().to_vec(),
        }
    }

    pub fn from_policy(policy: &GaussianPolicy, seed: u64) -> Self {
        Self {
            kind: ParamKind::GaussianPolicy,
            layer_sizes: policy.mean_net().layer_sizes().to_vec(),
            seed,
            mean_box: policy.mean_box().map(|(lo, hi)| (lo.to_vec(), hi.to_vec())),
            values: policy.to_flat(),
        }
    }

    pub fn to_mlp(&self) -> Result<Mlp, pqac_core::Error> {
        Mlp::from_params(&self.layer_sizes, self.values.clone())
    }

    pub fn to_policy(&self) -> Result<GaussianPolicy, pqac_core::Error> {
        let policy = GaussianPolicy::from_flat(&self.layer_sizes, &self.values)?;
        match &self.mean_box {
            Some((lo, hi)) => policy.with_mean_box(lo, hi),
            None => Ok(policy),
        }
    }

    pub fn render(&self) -> String {
        let sizes: Vec<String> = self.layer_sizes.iter().map(usize::to_string).collect();
        let mut out = format!(
            "{PARAMS_VERSION}\nkind = {}\nlayer_sizes = {}\nseed = {}\n",
            self.kind.as_str(),
            sizes.join(","),
            self.seed,
        );
        if let Some((lo, hi)) = &self.mean_box {
            writeln!(out, "mean_low = {}\nmean_high = {}", render_list(lo), render_list(hi)).expect("writing to a String");
        }
        writeln!(out, "count = {}\n", self.values.len()).expect("writing to a String");
        for v in &self.values {
            writeln!(out, "{v:?}").expect("writing to a String");
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |message: String| HarnessError::format(path, message);
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, PARAMS_VERSION)) => {}
            _ => return Err(bad(format!("expected `{PARAMS_VERSION}` on the first line"))),
        }
        let (mut kind, mut sizes, mut seed, mut count) = (None, None, None, None);
        let (mut mean_low, mut mean_high) = (None, None);
        for (i, line) in lines.by_ref() {
            if line.is_empty() {
                break;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(format!("line {}: expected `key = value`", i + 1)))?;
            let invalid = || bad(format!("line {}: invalid {key} `{value}`", i + 1));
            match key {
                "kind" => {
                    kind = Some(match value {
                        "mlp" => ParamKind::Mlp,
                        "gaussian-policy" => ParamKind::GaussianPolicy,
                        _ => return Err(invalid()),
                    })
                }
                "layer_sizes" => {
                    sizes = Some(
                        value
                            .split(',')
                            .map(|s| s.trim().parse::<usize>())
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|_| invalid())?,
                    )
                }
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| invalid())?),
                "count" => count = Some(value.parse::<usize>().map_err(|_| invalid())?),
                "mean_low" | "mean_high" => {
                    let list = value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| invalid())?;
                    if key == "mean_low" {
                        mean_low = Some(list);
                    } else {
                        mean_high = Some(list);
                    }
                }
                _ => return Err(bad(format!("line {}: unknown header key `{key}`", i + 1))),
            }
        }
        let values = lines
            .map(|(i, line)| {
                line.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("line {}: not a number: `{line}`", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        let missing = |key: &str| bad(format!("missing header key `{key}`"));
        let count = count.ok_or_else(|| missing("count"))?;
        if values.len() != count {
            return Err(bad(format!("header declares {count} values, found {}", values.len())));
        }
        let mean_box = match (mean_low, mean_high) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => None,
            (Some(_), None) => return Err(missing("mean_high")),
            (None, Some(_)) => return Err(missing("mean_low")),
        };
        Ok(Self {
            kind: kind.ok_or_else(|| missing("kind"))?,
            layer_sizes: sizes.ok_or_else(|| missing("layer_sizes"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            mean_box,
            values,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).map_err(HarnessError::io(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(HarnessError::io(path))?;
        Self::parse(&text, path)
    }

    fn expect_kind(self, kind: ParamKind, path: &Path) -> Result<Self> {
        if self.kind != kind {
            return Err(HarnessError::format(
                path,
                format!("expected kind {}, found {}", kind.as_str(), self.kind.as_str()),
            ));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub format: String,
    pub seed: u64,
    pub env: EnvName,
    pub state_dim: usize,
    pub action_dim: usize,
    pub ensemble_size: usize,
    pub episodes: u64,
    pub updates: u64,
    pub bounds_initialized: bool,
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub policy: GaussianPolicy,
    pub critics: Vec<Mlp>,
    pub targets: Vec<Mlp>,
}

fn critic_path(dir: &Path, prefix: &str, k: usize) -> PathBuf {
    dir.join(format!("{prefix}_{k}.params"))
}

impl Checkpoint {
    pub fn save(dir: &Path, agent: &Agent, config: &RunConfig, seed: u64) -> Result<()> {
        fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
        let tracker = agent.tracker();
        let meta = CheckpointMeta {
            format: META_FORMAT.into(),
            seed,
            env: config.env.name,
            state_dim: agent.policy().state_dim(),
            action_dim: agent.policy().action_dim(),
            ensemble_size: agent.critics().len(),
            episodes: agent.episodes(),
            updates: agent.updates(),
            bounds_initialized: tracker.is_initialized(),
            bound_lo: tracker.bound_lo(),
            bound_hi: tracker.bound_hi(),
            config: config.clone(),
        };
        let meta_text = toml::to_string(&meta).map_err(|e| HarnessError::format(dir, e.to_string()))?;
        let meta_path = dir.join("meta.toml");
        fs::write(&meta_path, meta_text).map_err(HarnessError::io(&meta_path))?;
        ParamFile::from_policy(agent.policy(), seed).write(&dir.join("policy.params"))?;
        for (k, (c, t)) in agent.critics().iter().zip(agent.target_critics()).enumerate() {
            ParamFile::from_mlp(c, seed).write(&critic_path(dir, "critic", k))?;
            ParamFile::from_mlp(t, seed).write(&critic_path(dir, "target", k))?;
        }
        Ok(())
    }

    pub fn load_meta(dir: &Path) -> Result<CheckpointMeta> {
        let path = dir.join("meta.toml");
        let text = fs::read_to_string(&path).map_err(HarnessError::io(&path))?;
        let meta: CheckpointMeta = toml::from_str(&text).map_err(|e| HarnessError::format(&path, e.message().trim()))?;
        if meta.format != META_FORMAT {
            return Err(HarnessError::format(&path, format!("unsupported format `{}`", meta.format)));
        }
        Ok(meta)
    }

    /// Metadata and policy only, enough for evaluation or as an expert.
    pub fn load_policy(dir: &Path) -> Result<(CheckpointMeta, GaussianPolicy)> {
        let meta = Self::load_meta(dir)?;
        let path = dir.join("policy.params");
        let policy = ParamFile::read(&path)?
            .expect_kind(ParamKind::GaussianPolicy, &path)?
            .to_policy()?;
        if policy.state_dim() != meta.state_dim || policy.action_dim() != meta.action_dim {
            return Err(HarnessError::Mismatch {
                path,
                message: "policy dimensions disagree with meta.toml".into(),
            });
        }
        Ok((meta, policy))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let (meta, policy) = Self::load_policy(dir)?;
        let load_nets = |prefix: &str| {
            (0..meta.ensemble_size)
                .map(|k| {
                    let path = critic_path(dir, prefix, k);
                    Ok(ParamFile::read(&path)?.expect_kind(ParamKind::Mlp, &path)?.to_mlp()?)
                })
                .collect::<Result<Vec<_>>>()
        };
        let critics = load_nets("critic")?;
        let targets = load_nets("target")?;
        Ok(Self {
            meta,
            policy,
            critics,
            targets,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pqac_core::rng::rng_from_seed;

    #[test]
    fn param_file_round_trip_is_bit_exact() {
        let mut net = Mlp::new(&[3, 5, 2], &mut rng_from_seed(1)).unwrap();
        net.params_mut()[0] = -0.0;
        net.params_mut()[1] = 1e-310;
        net.params_mut()[2] = 0.1 + 0.2;
        let file = ParamFile::from_mlp(&net, 42);
        let parsed = ParamFile::parse(&file.render(), Path::new("x")).unwrap();
        assert_eq!(parsed.layer_sizes, vec![3, 5, 2]);
        assert_eq!(parsed.seed, 42);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&parsed.values), bits(net.params()));
    }

    #[test]
    fn malformed_files_are_rejected() {
        let good = ParamFile::from_mlp(&Mlp::zeros(&[1, 1]).unwrap(), 0).render();
        assert!(ParamFile::parse(&good, Path::new("x")).is_ok());
        assert!(ParamFile::parse(&good.replace("# pqac-params v1", "# other"), Path::new("x")).is_err());
        assert!(ParamFile::parse(&good.replace("count = 2", "count = 3"), Path::new("x")).is_err());
        assert!(ParamFile::parse(&format!("{good}abc\n"), Path::new("x")).is_err());
        assert!(ParamFile::parse(&good.replace("kind = mlp", "kind = cnn"), Path::new("x")).is_err());
    }

    #[test]
    fn header_layout() {
        let text = ParamFile::from_mlp(&Mlp::zeros(&[2, 1]).unwrap(), 9).render();
        assert_eq!(
            text,
            "# pqac-params v1\nkind = mlp\nlayer_sizes = 2,1\nseed = 9\ncount = 3\n\n0.0\n0.0\n0.0\n"
        );
    }

    #[test]
    fn boxed_policy_round_trip() {
        let policy = GaussianPolicy::new(&[2, 4, 2], -0.5, &mut rng_from_seed(3))
            .unwrap()
            .with_mean_box(&[-2.0, -0.5], &[2.0, 1.5])
            .unwrap();
        let text = ParamFile::from_policy(&policy, 7).render();
        assert!(text.contains("mean_low = -2.0,-0.5\nmean_high = 2.0,1.5\ncount = "));
        let back = ParamFile::parse(&text, Path::new("x")).unwrap().to_policy().unwrap();
        assert_eq!(back, policy);
        let half = text.replace("mean_high = 2.0,1.5\n", "");
        assert!(ParamFile::parse(&half, Path::new("x")).is_err());
    }
}
