//! Overflow-safe sigmoid, softplus and log-sigmoid.
//!
//! `sigmoid` rounds to exactly `0.0` or `1.0` far in the tails. Anything that
//! needs a ratio of sigmoids must go through [`softplus`] / [`log_sigmoid`].

use libm::{exp, log1p};

/// `1 / (1 + exp(-x))`, evaluated so that `exp` never overflows.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(x))` as `max(x, 0) + ln(1 + exp(-|x|))`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + log1p(exp(-x.abs()))
}

/// `ln sigmoid(x) = -softplus(-x)`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

/// `sigmoid(x) * sigmoid(-x)` computed in the log domain, so it stays positive
/// (down to the subnormal range) instead of collapsing to `0 * 1`.
#[inline]
pub fn sigmoid_variance(x: f64) -> f64 {
    exp(log_sigmoid(x) + log_sigmoid(-x))
}

/// `sqrt(sigmoid(x) * sigmoid(-x))`, also in the log domain.
#[inline]
pub fn sigmoid_std(x: f64) -> f64 {
    exp(0.5 * (log_sigmoid(x) + log_sigmoid(-x)))
}

/// `sigmoid(b) - sigmoid(a)`, taking the difference on whichever side of zero
/// keeps both terms away from 1 so that nothing cancels catastrophically.
#[inline]
pub fn sigmoid_diff(b: f64, a: f64) -> f64 {
    if a + b > 0.0 {
        sigmoid(-a) - sigmoid(-b)
    } else {
        sigmoid(b) - sigmoid(a)
    }
}
