//! Order statistics used by ensembles and evaluation.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Median of a non-empty slice; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    match values.len() {
        0 => f64::NAN,
        1 => values[0],
        2 => 0.5 * (values[0] + values[1]),
        n => {
            let mut sorted: Vec<f64> = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            }
        }
    }
}

/// Mean after discarding `floor(n / 4)` values from each end.
pub fn interquartile_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientData {
            requested: 1,
            available: 0,
        });
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cut = sorted.len() / 4;
    let kept = &sorted[cut..sorted.len() - cut];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}
