use alloc::vec;
use alloc::vec::Vec;

use crate::error::check_len;
use crate::{Error, Result};

/// Adaptive-moment (Adam) optimizer state for one parameter vector.
///
/// An all-zero gradient is a no-op: neither the moments nor the step count move.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub stabilizer: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl OptimizerState {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Self::with_moments(num_params, lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_moments(num_params: usize, lr: f64, beta1: f64, beta2: f64, stabilizer: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            stabilizer,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn num_params(&self) -> usize {
        self.m.len()
    }

    /// Descend along `grad`.
    pub fn apply_update(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        self.apply_update_parts(&mut [params], grad)
    }

    /// Same as [`OptimizerState::apply_update`] for a parameter vector stored
    /// in several consecutive pieces.
    pub fn apply_update_parts(&mut self, parts: &mut [&mut [f64]], grad: &[f64]) -> Result<()> {
        let total: usize = parts.iter().map(|p| p.len()).sum();
        check_len("optimizer parameters", self.m.len(), total)?;
        check_len("optimizer gradient", self.m.len(), grad.len())?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidConfig("non-finite gradient"));
        }
        if grad.iter().all(|&g| g == 0.0) {
            return Ok(());
        }
        self.step += 1;
        let bc1 = 1.0 - libm::pow(self.beta1, self.step as f64);
        let bc2 = 1.0 - libm::pow(self.beta2, self.step as f64);
        let mut i = 0;
        for part in parts.iter_mut() {
            for p in part.iter_mut() {
                let g = grad[i];
                self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
                self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
                let m_hat = self.m[i] / bc1;
                let v_hat = self.v[i] / bc2;
                *p -= self.lr * m_hat / (libm::sqrt(v_hat) + self.stabilizer);
                i += 1;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut opt = OptimizerState::new(3, 0.1);
        let mut p = [1.0, -2.0, 3.0];
        opt.apply_update(&mut p, &[0.5, 0.0, -1.0]).unwrap();
        let snapshot = p;
        opt.apply_update(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, snapshot);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut opt = OptimizerState::new(2, 0.01);
        let mut p = [0.0, 0.0];
        opt.apply_update(&mut p, &[3.0, -0.2]).unwrap();
        assert!((p[0] + 0.01).abs() < 1e-9);
        assert!((p[1] - 0.01).abs() < 1e-9);
    }

    #[test]
    fn minimises_a_parabola() {
        let mut opt = OptimizerState::new(1, 0.05);
        let mut x = [1.0];
        for _ in 0..100 {
            let g = [2.0 * x[0]];
            opt.apply_update(&mut x, &g).unwrap();
        }
        assert!(x[0].abs() < 0.1, "x = {}", x[0]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut opt = OptimizerState::new(2, 0.1);
        assert!(opt.apply_update(&mut [0.0; 3], &[0.0; 3]).is_err());
        assert!(opt.apply_update(&mut [0.0; 2], &[0.0; 1]).is_err());
    }

    #[test]
    fn split_parts_equal_contiguous() {
        let grad = [0.3, -0.1, 0.7, 0.2];
        let mut a = OptimizerState::new(4, 0.02);
        let mut b = a.clone();
        let mut whole = [1.0, 2.0, 3.0, 4.0];
        let (mut left, mut right) = ([1.0, 2.0, 3.0], [4.0]);
        for _ in 0..3 {
            a.apply_update(&mut whole, &grad).unwrap();
            b.apply_update_parts(&mut [&mut left, &mut right], &grad).unwrap();
        }
        assert_eq!(&whole[..3], &left);
        assert_eq!(whole[3], right[0]);
    }
}
