//! Performance profiles over final evaluation scores.
//!
//! Scores are min-max normalized per environment over all pooled runs; each
//! condition's curve is the fraction of its runs whose normalized score is
//! strictly above `tau`, for `tau = 0, 0.01, ..., 1`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::metrics::read_metrics;

pub const PROFILE_VERSION: &str = "pqac-profile v1";
pub const THRESHOLDS: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub struct RunScore {
    pub condition: String,
    pub env: String,
    pub run_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub condition: String,
    /// `fractions[i]` belongs to threshold `i / 100`.
    pub fractions: Vec<f64>,
}

pub fn threshold(i: usize) -> f64 {
    i as f64 / (THRESHOLDS - 1) as f64
}

/// Last evaluation score of every run in a metrics file. Runs that never
/// evaluated are skipped.
pub fn final_scores(path: &Path) -> Result<Vec<RunScore>> {
    let (header, rows) = read_metrics(path)?;
    let mut scores: Vec<RunScore> = Vec::new();
    for row in rows {
        let Some(score) = row.eval_iqm else { continue };
        match scores.iter_mut().find(|s| s.run_id == row.run_id) {
            Some(s) => s.score = score,
            None => scores.push(RunScore {
                condition: header.condition.clone(),
                env: header.env.clone(),
                run_id: row.run_id,
                score,
            }),
        }
    }
    Ok(scores)
}

/// Curves in order of first appearance of each condition.
pub fn profile(runs: &[RunScore]) -> Result<Vec<ProfileCurve>> {
    if runs.len() < 2 {
        return Err(pqac_core::Error::InsufficientData {
            requested: 2,
            available: runs.len(),
        }
        .into());
    }
    let mut normalized = Vec::with_capacity(runs.len());
    for run in runs {
        let (lo, hi) = runs
            .iter()
            .filter(|r| r.env == run.env)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.score), hi.max(r.score)));
        if !(hi > lo) {
            return Err(pqac_core::Error::DegenerateNormalization.into());
        }
        normalized.push((run.condition.as_str(), (run.score - lo) / (hi - lo)));
    }
    let mut conditions: Vec<&str> = Vec::new();
    for (c, _) in &normalized {
        if !conditions.contains(c) {
            conditions.push(c);
        }
    }
    Ok(conditions
        .into_iter()
        .map(|condition| {
            let scores: Vec<f64> = normalized.iter().filter(|(c, _)| *c == condition).map(|(_, s)| *s).collect();
            let fractions = (0..THRESHOLDS)
                .map(|i| {
                    let tau = threshold(i);
                    scores.iter().filter(|&&s| s > tau).count() as f64 / scores.len() as f64
                })
                .collect();
            ProfileCurve {
                condition: condition.to_string(),
                fractions,
            }
        })
        .collect())
}

pub fn render_profile(curves: &[ProfileCurve]) -> String {
    let mut out = format!("# {PROFILE_VERSION}\ncondition,threshold,fraction\n");
    for curve in curves {
        for (i, f) in curve.fractions.iter().enumerate() {
            writeln!(out, "{},{:?},{:?}", curve.condition, threshold(i), f).expect("writing to a String");
        }
    }
    out
}

/// Profile of the pooled final scores of `inputs`, written to `out`.
pub fn profile_files(inputs: &[impl AsRef<Path>], out: &Path) -> Result<Vec<ProfileCurve>> {
    let mut runs = Vec::new();
    for input in inputs {
        runs.extend(final_scores(input.as_ref())?);
    }
    let curves = profile(&runs)?;
    std::fs::write(out, render_profile(&curves)).map_err(HarnessError::io(out))?;
    Ok(curves)
}
