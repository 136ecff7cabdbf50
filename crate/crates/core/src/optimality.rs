//! Sigmoid optimality model: level geometry and the running value-bound estimate.

use alloc::vec::Vec;

use crate::scalar::sigmoid;
use crate::{Error, Result};

/// Smallest admissible gap between the upper and lower value bounds.
pub const MIN_BOUND_GAP: f64 = 1e-6;

/// Sharpness, level count and value bounds of the optimality model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityConfig {
    lambda: f64,
    levels: usize,
    bound_lo: f64,
    bound_hi: f64,
}

impl OptimalityConfig {
    pub fn new(lambda: f64, levels: usize, bound_lo: f64, bound_hi: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig("lambda must be positive and finite"));
        }
        if levels == 0 {
            return Err(Error::InvalidConfig("at least one optimality level is required"));
        }
        if !(bound_lo.is_finite() && bound_hi.is_finite() && bound_hi > bound_lo) {
            return Err(Error::InvalidConfig("value bounds must be finite with hi > lo"));
        }
        Ok(Self {
            lambda,
            levels,
            bound_lo,
            bound_hi,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn bound_lo(&self) -> f64 {
        self.bound_lo
    }

    pub fn bound_hi(&self) -> f64 {
        self.bound_hi
    }

    /// Same sharpness and level count, different bounds.
    pub fn with_bounds(&self, bound_lo: f64, bound_hi: f64) -> Result<Self> {
        Self::new(self.lambda, self.levels, bound_lo, bound_hi)
    }

    /// Center of level `l` (1-based): `lo + (hi - lo) * l / (L + 1)`.
    #[inline]
    pub fn level_center(&self, l: usize) -> f64 {
        self.bound_lo + (self.bound_hi - self.bound_lo) * l as f64 / (self.levels + 1) as f64
    }

    /// Evenly spaced, strictly interior level centers.
    pub fn level_centers(&self) -> Vec<f64> {
        (1..=self.levels).map(|l| self.level_center(l)).collect()
    }

    /// `lambda * (L + 1) / (hi - lo)`, shared by every level.
    #[inline]
    pub fn sharpness_scale(&self) -> f64 {
        self.lambda * (self.levels + 1) as f64 / (self.bound_hi - self.bound_lo)
    }
}

/// Probability that the future is optimal given a value estimate.
#[inline]
pub fn optimality_prob(v: f64, mu: f64, lambda_o: f64) -> f64 {
    sigmoid(lambda_o * (v - mu))
}

// pow(epsilon, 1/horizon) can round above the exact root, leaving beta^horizon
// a few ulps over epsilon. Step down until the power no longer exceeds it.
fn decay_rate(epsilon: f64, horizon: u32) -> f64 {
    let mut beta = libm::pow(epsilon, 1.0 / horizon as f64);
    while libm::pow(beta, horizon as f64) > epsilon {
        beta = f64::from_bits(beta.to_bits() - 1);
    }
    beta
}

/// Running estimate of the value bounds with geometric forgetting.
///
/// `beta = epsilon^(1/horizon)`, so the influence of any single update decays
/// below `epsilon` after `horizon` further updates.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTracker {
    bound_lo: f64,
    bound_hi: f64,
    epsilon: f64,
    horizon: u32,
    beta: f64,
    initialized: bool,
}

impl BoundsTracker {
    pub const DEFAULT_EPSILON: f64 = 1e-5;
    pub const DEFAULT_HORIZON: u32 = 200;

    /// Uninitialised tracker; the first batch seeds the bounds.
    pub fn new(epsilon: f64, horizon: u32) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidConfig("bound epsilon must lie in (0, 1)"));
        }
        if horizon == 0 {
            return Err(Error::InvalidConfig("bound horizon must be positive"));
        }
        Ok(Self {
            bound_lo: 0.0,
            bound_hi: 0.0,
            epsilon,
            horizon,
            beta: decay_rate(epsilon, horizon),
            initialized: false,
        })
    }

    /// Tracker that starts from known bounds instead of seeding from data.
    pub fn with_bounds(epsilon: f64, horizon: u32, bound_lo: f64, bound_hi: f64) -> Result<Self> {
        if !(bound_hi > bound_lo) {
            return Err(Error::InvalidConfig("value bounds must satisfy hi > lo"));
        }
        let mut tracker = Self::new(epsilon, horizon)?;
        tracker.bound_lo = bound_lo;
        tracker.bound_hi = bound_hi;
        tracker.initialized = true;
        Ok(tracker)
    }

    pub fn bound_lo(&self) -> f64 {
        self.bound_lo
    }

    pub fn bound_hi(&self) -> f64 {
        self.bound_hi
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    /// Fold the extremes of one replayed batch of value estimates into the bounds.
    pub fn update(&mut self, batch_values: &[f64]) -> Result<()> {
        let (min, max) = batch_values
            .iter()
            .fold(None, |acc: Option<(f64, f64)>, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
            .ok_or(Error::DegenerateBatch)?;
        let target_hi = max + self.epsilon;
        let target_lo = min - self.epsilon;
        if self.initialized {
            self.bound_hi = self.beta * self.bound_hi + (1.0 - self.beta) * target_hi;
            self.bound_lo = self.beta * self.bound_lo + (1.0 - self.beta) * target_lo;
        } else {
            self.bound_hi = target_hi;
            self.bound_lo = target_lo;
            self.initialized = true;
        }
        if self.bound_hi - self.bound_lo < MIN_BOUND_GAP {
            let mid = 0.5 * (self.bound_hi + self.bound_lo);
            self.bound_lo = mid - 0.5 * MIN_BOUND_GAP;
            self.bound_hi = mid + 0.5 * MIN_BOUND_GAP;
        }
        Ok(())
    }

    /// Optimality geometry for the current bounds.
    pub fn config(&self, lambda: f64, levels: usize) -> Result<OptimalityConfig> {
        OptimalityConfig::new(lambda, levels, self.bound_lo, self.bound_hi)
    }
}
