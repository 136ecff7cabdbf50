//! Nonlinear TD-error transforms.
//!
//! Each divergence-derived rule maps a raw TD error `delta` and the value
//! estimate `v` (so that `Q = v + delta`) to the weight that multiplies both
//! `grad V(s)` and `grad ln pi(a|s)`. Per level the inputs are the level center
//! `mu` and the shared sharpness `lambda_o`; [`transform`] averages the levels.
//!
//! | kind     | per-level value                                         |
//! |----------|---------------------------------------------------------|
//! | Linear   | `delta`                                                 |
//! | RKL      | `lambda_o * s_V * (1 - s_V) * delta`                    |
//! | FKL      | `s_Q - s_V`                                             |
//! | Jeffreys | `(RKL + FKL) / 2`                                       |
//! | JS       | `lambda_o * sqrt(s_V (1 - s_V)) * [delta + (sp(D - lambda_o delta) - sp(D)) / lambda_o]` |
//!
//! with `s_x = sigmoid(lambda_o (x - mu))` and `D = sp(lambda_o (Q - mu)) - sp(lambda_o (V - mu))`.

use core::fmt;
use core::str::FromStr;

use crate::optimality::OptimalityConfig;
use crate::scalar::{sigmoid_diff, sigmoid_std, sigmoid_variance, softplus};
use crate::{Error, Result};

/// The five learning rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Linear,
    Rkl,
    Fkl,
    Jeffreys,
    Js,
}

impl TransformKind {
    pub const ALL: [TransformKind; 5] = [
        TransformKind::Linear,
        TransformKind::Rkl,
        TransformKind::Fkl,
        TransformKind::Jeffreys,
        TransformKind::Js,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Linear => "linear",
            TransformKind::Rkl => "rkl",
            TransformKind::Fkl => "fkl",
            TransformKind::Jeffreys => "jeffreys",
            TransformKind::Js => "js",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TransformKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidConfig("unknown transform kind (expected linear, rkl, fkl, jeffreys or js)"))
    }
}

/// Factorisation of a per-level transform into a value-dependent weight and a
/// TD-error-dependent error term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub weight: f64,
    pub error: f64,
}

impl Decomposition {
    pub fn product(&self) -> f64 {
        self.weight * self.error
    }
}

fn rkl(delta: f64, x: f64, lambda_o: f64) -> Decomposition {
    Decomposition {
        weight: lambda_o * sigmoid_variance(x),
        error: delta,
    }
}

fn fkl(x: f64, q: f64) -> Decomposition {
    Decomposition {
        weight: 1.0,
        error: sigmoid_diff(q, x),
    }
}

fn js(x: f64, q: f64, lambda_o: f64) -> Decomposition {
    // lambda_o * delta + sp(D - lambda_o delta) - sp(D) rewritten with
    // sp(y) = y + sp(-y) as sp(-D_bar) - sp(-D), where D_bar is the same
    // difference on the complementary side. Both terms are monotone in delta,
    // which keeps the rounded result monotone once the levels saturate.
    let d = softplus(q) - softplus(x);
    let d_bar = softplus(-q) - softplus(-x);
    Decomposition {
        weight: lambda_o * sigmoid_std(x),
        error: (softplus(-d_bar) - softplus(-d)) / lambda_o,
    }
}

/// Per-level transform for center `mu` and sharpness `lambda_o`.
pub fn transform_level(kind: TransformKind, delta: f64, v: f64, mu: f64, lambda_o: f64) -> f64 {
    if kind == TransformKind::Linear {
        return delta;
    }
    let x = lambda_o * (v - mu);
    let q = x + lambda_o * delta;
    match kind {
        TransformKind::Linear => delta,
        TransformKind::Rkl => rkl(delta, x, lambda_o).product(),
        TransformKind::Fkl => fkl(x, q).product(),
        TransformKind::Jeffreys => 0.5 * (rkl(delta, x, lambda_o).product() + fkl(x, q).product()),
        TransformKind::Js => js(x, q, lambda_o).product(),
    }
}

/// Level-averaged transform `L^-1 sum_l transform_level(.., mu_l, lambda_o)`.
pub fn transform(kind: TransformKind, delta: f64, v: f64, cfg: &OptimalityConfig) -> f64 {
    if kind == TransformKind::Linear {
        return delta;
    }
    let lambda_o = cfg.sharpness_scale();
    let sum: f64 = (1..=cfg.levels())
        .map(|l| transform_level(kind, delta, v, cfg.level_center(l), lambda_o))
        .sum();
    sum / cfg.levels() as f64
}

/// Weight/error factorisation for the divergence-derived rules.
///
/// Linear and Jeffreys have none; see [`decompose_mixture`] for the averaged
/// Jeffreys view used in plots.
pub fn decompose(kind: TransformKind, delta: f64, v: f64, mu: f64, lambda_o: f64) -> Result<Decomposition> {
    let x = lambda_o * (v - mu);
    let q = x + lambda_o * delta;
    match kind {
        TransformKind::Rkl => Ok(rkl(delta, x, lambda_o)),
        TransformKind::Fkl => Ok(fkl(x, q)),
        TransformKind::Js => Ok(js(x, q, lambda_o)),
        TransformKind::Linear | TransformKind::Jeffreys => Err(Error::NoCanonicalDecomposition),
    }
}

/// Elementwise mean of the RKL and FKL decompositions. Only meaningful for
/// plotting: `weight * error` is not the Jeffreys transform.
pub fn decompose_mixture(delta: f64, v: f64, mu: f64, lambda_o: f64) -> Decomposition {
    let x = lambda_o * (v - mu);
    let q = x + lambda_o * delta;
    let r = rkl(delta, x, lambda_o);
    let f = fkl(x, q);
    Decomposition {
        weight: 0.5 * (r.weight + f.weight),
        error: 0.5 * (r.error + f.error),
    }
}

pub mod oracle {
    //! Reference JS weight from the raw log-ratio of sigmoids.

    use crate::scalar::sigmoid;
    use crate::{Error, Result};

    /// Largest `|lambda_o (x - mu)|` at which raw sigmoid ratios are trusted.
    pub const DOMAIN: f64 = 30.0;

    /// `-sqrt(s_V (1 - s_V)) * [ln(s_V / (s_V + s_Q)) - ln((1 - s_V) / ((1 - s_V) + (1 - s_Q)))]`
    /// evaluated with plain sigmoids.
    pub fn js_direct_oracle(delta: f64, v: f64, mu: f64, lambda_o: f64) -> Result<f64> {
        let x = lambda_o * (v - mu);
        let q = lambda_o * (v + delta - mu);
        if !(x.abs() <= DOMAIN && q.abs() <= DOMAIN) {
            return Err(Error::OracleDomain);
        }
        let sv = sigmoid(x);
        let sq = sigmoid(q);
        // 1 - sigmoid(30) keeps only three digits, so take the complements directly
        let sv_bar = sigmoid(-x);
        let sq_bar = sigmoid(-q);
        let log_ratio = libm::log(sv / (sv + sq)) - libm::log(sv_bar / (sv_bar + sq_bar));
        Ok(-libm::sqrt(sv * sv_bar) * log_ratio)
    }
}
