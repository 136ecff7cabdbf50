use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pqac::contour::{contour, render_contour, ContourSpec};
use pqac::envs::EnvName;
use pqac::{HarnessError, Result, RunConfig};
use pqac_core::TransformKind;

#[derive(Parser)]
#[command(name = "pqac", version, about = "Pseudo-quantized actor-critic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of a config and write metrics and checkpoints
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds, replacing `run.seeds`
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Output directory, replacing `run.out_dir`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump a transform surface as CSV
    Contour {
        #[arg(long)]
        kind: TransformKind,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        levels: usize,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long)]
        grid: usize,
        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interquartile-mean return of a checkpoint's policy mean
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        env: EnvName,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Performance profiles from metrics files
    Profile {
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, seeds, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(seeds) = seeds {
                cfg.run.seeds = seeds;
            }
            cfg.validate()
                .map_err(|(key, message)| HarnessError::Usage(format!("{key}: {message}")))?;
            let out = out.unwrap_or_else(|| cfg.run.out_dir.clone());
            for run in pqac::train::train_all(&cfg, &out)? {
                let score = run.final_eval.map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into());
                println!("{} final_eval_iqm={score} dir={}", run.run_id, run.dir.display());
            }
        }
        Command::Contour {
            kind,
            lambda,
            levels,
            lo,
            hi,
            grid,
            out,
        } => {
            let spec = ContourSpec {
                kind,
                lambda,
                levels,
                lo,
                hi,
                grid,
            };
            let text = render_contour(&spec, &contour(&spec)?);
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| HarnessError::Io { path, source: e })?,
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| HarnessError::Io {
                        path: "<stdout>".into(),
                        source: e,
                    })?,
            }
        }
        Command::Eval {
            checkpoint,
            env,
            episodes,
            seed,
        } => {
            let report = pqac::eval::eval_checkpoint(&checkpoint, env, episodes, seed)?;
            println!("{:?}", report.iqm);
        }
        Command::Profile { inputs, out } => {
            let curves = pqac::profile::profile_files(&inputs, &out)?;
            for c in curves {
                let area: f64 = c.fractions.iter().sum::<f64>() / c.fractions.len() as f64;
                println!("{} area={area:.3}", c.condition);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
