use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mlp::{Mlp, Workspace};
use crate::error::check_len;
use crate::Result;

/// `ln(1e-3)`
pub const LOG_STD_MIN: f64 = -6.907_755_278_982_137;
/// `ln(10)`
pub const LOG_STD_MAX: f64 = core::f64::consts::LN_10;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Diagonal Gaussian policy: a state-conditioned mean and state-independent
/// log standard deviations.
///
/// The flat parameter (and gradient) layout is the mean network's parameters
/// followed by one log-std per action dimension.
///
/// With a mean box the mean is `center + half_width * tanh(net(s))`, otherwise
/// it is the network output itself.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    mean_net: Mlp,
    log_std: Vec<f64>,
    mean_box: Option<MeanBox>,
}

#[derive(Debug, Clone, PartialEq)]
struct MeanBox {
    low: Vec<f64>,
    high: Vec<f64>,
}

impl GaussianPolicy {
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], init_log_std: f64, rng: &mut R) -> Result<Self> {
        let mean_net = Mlp::new(sizes, rng)?;
        Ok(Self::from_parts(mean_net, vec![init_log_std; sizes[sizes.len() - 1]]))
    }

    /// Log-stds are clamped into `[LOG_STD_MIN, LOG_STD_MAX]`; extra or missing
    /// entries are a caller bug and fail in [`GaussianPolicy::from_flat`].
    pub fn from_parts(mean_net: Mlp, mut log_std: Vec<f64>) -> Self {
        log_std.resize(mean_net.output_dim(), 0.0);
        for s in &mut log_std {
            *s = s.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
        Self { mean_net, log_std, mean_box: None }
    }

    /// Squash the mean into `[low, high]`. Each bound pair must be finite with
    /// `low < high`.
    pub fn with_mean_box(mut self, low: &[f64], high: &[f64]) -> Result<Self> {
        check_len("mean lower bound", self.action_dim(), low.len())?;
        check_len("mean upper bound", self.action_dim(), high.len())?;
        for (lo, hi) in low.iter().zip(high) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(crate::Error::InvalidConfig("mean box needs finite low < high"));
            }
        }
        self.mean_box = Some(MeanBox { low: low.to_vec(), high: high.to_vec() });
        Ok(self)
    }

    /// `(low, high)` of the mean box, if any.
    pub fn mean_box(&self) -> Option<(&[f64], &[f64])> {
        self.mean_box.as_ref().map(|b| (b.low.as_slice(), b.high.as_slice()))
    }

    // net output -> (mean, d mean / d output)
    fn squash(&self, raw: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match &self.mean_box {
            None => (raw.to_vec(), vec![1.0; raw.len()]),
            Some(b) => raw
                .iter()
                .zip(b.low.iter().zip(&b.high))
                .map(|(&r, (lo, hi))| {
                    let half = 0.5 * (hi - lo);
                    let t = libm::tanh(r);
                    (0.5 * (hi + lo) + half * t, half * (1.0 - t * t))
                })
                .unzip(),
        }
    }

    pub fn from_flat(sizes: &[usize], params: &[f64]) -> Result<Self> {
        let n_mean = super::mlp::param_count(sizes);
        let action_dim = *sizes.last().unwrap_or(&0);
        check_len("policy parameters", n_mean + action_dim, params.len())?;
        let mean_net = Mlp::from_params(sizes, params[..n_mean].to_vec())?;
        Ok(Self::from_parts(mean_net, params[n_mean..].to_vec()))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = self.mean_net.params().to_vec();
        flat.extend_from_slice(&self.log_std);
        flat
    }

    pub fn mean_net(&self) -> &Mlp {
        &self.mean_net
    }

    pub fn log_std(&self) -> &[f64] {
        &self.log_std
    }

    pub fn state_dim(&self) -> usize {
        self.mean_net.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.mean_net.output_dim()
    }

    pub fn num_params(&self) -> usize {
        self.mean_net.num_params() + self.log_std.len()
    }

    pub fn mean(&self, state: &[f64]) -> Result<Vec<f64>> {
        let raw = self.mean_net.forward(state)?;
        Ok(self.squash(&raw).0)
    }

    pub fn std(&self) -> Vec<f64> {
        self.log_std.iter().map(|&s| libm::exp(s)).collect()
    }

    pub fn log_prob(&self, state: &[f64], action: &[f64]) -> Result<f64> {
        check_len("action", self.action_dim(), action.len())?;
        let mean = self.mean(state)?;
        Ok(mean
            .iter()
            .zip(action)
            .zip(&self.log_std)
            .map(|((mu, a), ls)| {
                let z = (a - mu) / libm::exp(*ls);
                -ls - HALF_LN_2PI - 0.5 * z * z
            })
            .sum())
    }

    pub fn log_prob_grad(&self, state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
        check_len("policy input", self.state_dim(), state.len())?;
        check_len("action", self.action_dim(), action.len())?;
        let mut ws = Workspace::new(&self.mean_net);
        let mut grad = vec![0.0; self.num_params()];
        self.accumulate_log_prob_grad(&mut ws, state, action, 1.0, &mut grad);
        Ok(grad)
    }

    /// Adds `scale * grad ln pi(action | state)` into the flat `grad`.
    pub fn accumulate_log_prob_grad(
        &self,
        ws: &mut Workspace,
        state: &[f64],
        action: &[f64],
        scale: f64,
        grad: &mut [f64],
    ) {
        let n_mean = self.mean_net.num_params();
        let action_dim = self.action_dim();
        let (mean, slope) = self.squash(self.mean_net.forward_into(state, ws));
        let mut dmean = vec![0.0; action_dim];
        for i in 0..action_dim {
            let inv_var = libm::exp(-2.0 * self.log_std[i]);
            let diff = action[i] - mean[i];
            dmean[i] = diff * inv_var * slope[i];
            grad[n_mean + i] += scale * (diff * diff * inv_var - 1.0);
        }
        self.mean_net.backward(ws, &dmean, scale, &mut grad[..n_mean]);
    }

    /// Adds `scale * grad 0.5 |mean - clamp(mean, low, high)|^2` into the flat
    /// `grad`. Returns false (and leaves `grad` alone) when the mean is inside.
    pub fn accumulate_box_penalty_grad(
        &self,
        ws: &mut Workspace,
        state: &[f64],
        low: &[f64],
        high: &[f64],
        scale: f64,
        grad: &mut [f64],
    ) -> bool {
        let n_mean = self.mean_net.num_params();
        let (mean, slope) = self.squash(self.mean_net.forward_into(state, ws));
        let dmean: Vec<f64> = mean
            .iter()
            .zip(low.iter().zip(high))
            .zip(&slope)
            .map(|((m, (lo, hi)), d)| (m - m.clamp(*lo, *hi)) * d)
            .collect();
        if dmean.iter().all(|&d| d == 0.0) {
            return false;
        }
        self.mean_net.backward(ws, &dmean, scale, &mut grad[..n_mean]);
        true
    }

    /// `mean + std * N(0, I)`.
    pub fn sample<R: Rng + ?Sized>(&self, state: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let mut action = self.mean(state)?;
        for (a, log_std) in action.iter_mut().zip(&self.log_std) {
            let z: f64 = StandardNormal.sample(rng);
            *a += libm::exp(*log_std) * z;
        }
        Ok(action)
    }

    /// [`GaussianPolicy::sample`] clamped into `[low, high]`.
    pub fn sample_action<R: Rng + ?Sized>(&self, state: &[f64], low: &[f64], high: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        check_len("action lower bound", self.action_dim(), low.len())?;
        check_len("action upper bound", self.action_dim(), high.len())?;
        let mut action = self.sample(state, rng)?;
        clamp_into(&mut action, low, high);
        Ok(action)
    }

    /// Clamp every log-std into `[lo, hi]`.
    pub fn clamp_log_std(&mut self, lo: f64, hi: f64) {
        for s in &mut self.log_std {
            *s = s.clamp(lo, hi);
        }
    }

    /// Descend along `grad` (flat layout) and re-clamp the log-stds.
    pub fn apply_update(&mut self, grad: &[f64], opt: &mut super::OptimizerState) -> Result<()> {
        opt.apply_update_parts(&mut [self.mean_net.params_mut(), &mut self.log_std], grad)?;
        self.clamp_log_std(LOG_STD_MIN, LOG_STD_MAX);
        Ok(())
    }
}

pub fn clamp_into(action: &mut [f64], low: &[f64], high: &[f64]) {
    for ((a, lo), hi) in action.iter_mut().zip(low).zip(high) {
        *a = a.clamp(*lo, *hi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn unit_policy(mean_bias: f64, log_std: f64) -> GaussianPolicy {
        // 1-D state -> 1-D action with zero weight, so the mean is the bias
        let net = Mlp::from_params(&[1, 1], vec![0.0, mean_bias]).unwrap();
        GaussianPolicy::from_parts(net, vec![log_std])
    }

    #[test]
    fn log_std_constants() {
        assert!((LOG_STD_MIN - libm::log(1e-3)).abs() < 1e-15);
        assert!((HALF_LN_2PI - 0.5 * libm::log(2.0 * core::f64::consts::PI)).abs() < 1e-15);
        let p = unit_policy(0.0, 50.0);
        assert_eq!(p.log_std()[0], LOG_STD_MAX);
        assert!((p.std()[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn log_prob_examples() {
        let p = unit_policy(0.4, 0.0);
        let at_mean = p.log_prob(&[9.0], &[0.4]).unwrap();
        assert!((at_mean + 0.918_939).abs() < 1e-6);
        let off = p.log_prob(&[9.0], &[1.4]).unwrap();
        assert!((off - (at_mean - 0.5)).abs() < 1e-12);
        assert!(p.log_prob(&[9.0], &[1.0, 2.0]).is_err());
        assert!(p.log_prob(&[9.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn log_prob_at_mean_closed_form() {
        let net = Mlp::new(&[2, 5, 3], &mut rng_from_seed(1)).unwrap();
        let p = GaussianPolicy::from_parts(net, vec![-0.3, 0.2, 1.1]);
        let s = [0.1, -0.4];
        let mean = p.mean(&s).unwrap();
        let expected: f64 = p.log_std().iter().map(|ls| -(ls + HALF_LN_2PI)).sum();
        assert!((p.log_prob(&s, &mean).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn density_integrates_to_one() {
        let p = unit_policy(0.7, libm::log(0.6));
        let (lo, hi, n) = (-8.0, 9.0, 20_000);
        let h = (hi - lo) / n as f64;
        let mut total = 0.0;
        for i in 0..=n {
            let a = lo + h * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            total += w * libm::exp(p.log_prob(&[0.0], &[a]).unwrap());
        }
        assert!((total * h - 1.0).abs() < 1e-3);
    }

    #[test]
    fn gradient_at_mean() {
        let net = Mlp::new(&[2, 4, 2], &mut rng_from_seed(9)).unwrap();
        let p = GaussianPolicy::from_parts(net, vec![0.3, -0.5]);
        let s = [0.2, 0.9];
        let g = p.log_prob_grad(&s, &p.mean(&s).unwrap()).unwrap();
        let n = p.mean_net().num_params();
        assert!(g[..n].iter().all(|&x| x.abs() < 1e-15));
        assert!((g[n] + 1.0).abs() < 1e-12 && (g[n + 1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn positive_score_pushes_mean_towards_action() {
        let mut p = unit_policy(0.0, 0.0);
        let mut opt = crate::approx::OptimizerState::new(p.num_params(), 0.01);
        let g = p.log_prob_grad(&[1.0], &[0.5]).unwrap();
        // descend on -w * score with w > 0
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        p.apply_update(&neg, &mut opt).unwrap();
        assert!(p.mean(&[1.0]).unwrap()[0] > 0.0);
    }

    #[test]
    fn sampling_is_seeded_and_clamped() {
        let p = unit_policy(0.0, LOG_STD_MIN);
        let mut rng = rng_from_seed(4);
        for _ in 0..1000 {
            let a = p.sample_action(&[0.0], &[-1.0], &[1.0], &mut rng).unwrap()[0];
            assert!(a.abs() <= 6e-3);
        }
        let wide = unit_policy(0.0, 2.0);
        let a = wide.sample_action(&[0.0], &[-2.0], &[2.0], &mut rng_from_seed(8)).unwrap();
        let b = wide.sample_action(&[0.0], &[-2.0], &[2.0], &mut rng_from_seed(8)).unwrap();
        assert_eq!(a, b);
        for _ in 0..1000 {
            let a = wide.sample_action(&[0.0], &[-2.0], &[2.0], &mut rng).unwrap()[0];
            assert!((-2.0..=2.0).contains(&a));
        }
    }

    #[test]
    fn sample_mean_matches_policy_mean() {
        let p = unit_policy(0.25, libm::log(0.5));
        let mut rng = rng_from_seed(77);
        let n = 100_000;
        let total: f64 = (0..n)
            .map(|_| p.sample_action(&[0.0], &[-100.0], &[100.0], &mut rng).unwrap()[0])
            .sum();
        let tol = 3.0 * 0.5 / libm::sqrt(n as f64);
        assert!((total / n as f64 - 0.25).abs() < tol);
    }

    #[test]
    fn flat_round_trip() {
        let p = GaussianPolicy::new(&[3, 6, 2], -0.5, &mut rng_from_seed(12)).unwrap();
        let q = GaussianPolicy::from_flat(&[3, 6, 2], &p.to_flat()).unwrap();
        assert_eq!(p, q);
        assert!(GaussianPolicy::from_flat(&[3, 6, 2], &p.to_flat()[1..]).is_err());
    }

    #[test]
    fn mean_box_squashes() {
        let net = Mlp::from_params(&[1, 1], vec![0.0, 50.0]).unwrap();
        let p = GaussianPolicy::from_parts(net.clone(), vec![0.0]).with_mean_box(&[-2.0], &[4.0]).unwrap();
        assert!((p.mean(&[0.0]).unwrap()[0] - 4.0).abs() < 1e-12);
        let centred = unit_policy(0.0, 0.0).with_mean_box(&[-2.0], &[4.0]).unwrap();
        assert_eq!(centred.mean(&[0.0]).unwrap(), vec![1.0]);
        assert_eq!(centred.mean_box(), Some((&[-2.0][..], &[4.0][..])));
        assert!(unit_policy(0.0, 0.0).with_mean_box(&[1.0], &[1.0]).is_err());
        assert!(unit_policy(0.0, 0.0).with_mean_box(&[-1.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(unit_policy(0.0, 0.0).with_mean_box(&[f64::NEG_INFINITY], &[1.0]).is_err());
    }
}
