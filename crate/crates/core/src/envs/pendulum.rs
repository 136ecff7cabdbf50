use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng as _;

use super::{EnvSpec, Environment, Step};
use crate::error::check_len;
use crate::rng::Rng;
use crate::Result;

/// Angle `0` is upright, `pi` hangs down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub theta: f64,
    pub theta_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    pub gravity: f64,
    pub mass: f64,
    pub length: f64,
    pub dt: f64,
    pub max_torque: f64,
    pub max_speed: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            gravity: 10.0,
            mass: 1.0,
            length: 1.0,
            dt: 0.05,
            max_torque: 2.0,
            max_speed: 8.0,
        }
    }
}

/// Wrap into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let wrapped = libm::remainder(theta, 2.0 * PI);
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

/// One semi-implicit Euler step of the torque-driven pendulum.
///
/// The reward is charged on the pre-step state:
/// `-(wrap(theta)^2 + 0.1 theta_dot^2 + 0.001 u^2)`.
pub fn pendulum_step(p: &PendulumParams, s: PendulumState, torque: f64) -> (PendulumState, f64) {
    let u = torque.clamp(-p.max_torque, p.max_torque);
    let th = wrap_angle(s.theta);
    let reward = -(th * th + 0.1 * s.theta_dot * s.theta_dot + 0.001 * u * u);
    let accel = 3.0 * p.gravity / (2.0 * p.length) * libm::sin(s.theta) + 3.0 / (p.mass * p.length * p.length) * u;
    let theta_dot = (s.theta_dot + accel * p.dt).clamp(-p.max_speed, p.max_speed);
    let theta = s.theta + theta_dot * p.dt;
    (PendulumState { theta, theta_dot }, reward)
}

/// Swing-up task, observed as `[cos theta, sin theta, theta_dot]`.
#[derive(Debug, Clone)]
pub struct Pendulum {
    params: PendulumParams,
    spec: EnvSpec,
    state: PendulumState,
    steps: usize,
}

impl Pendulum {
    pub const NAME: &'static str = "pendulum";

    pub fn new(max_steps: usize) -> Self {
        Self::with_params(PendulumParams::default(), max_steps)
    }

    pub fn with_params(params: PendulumParams, max_steps: usize) -> Self {
        Self {
            spec: EnvSpec {
                name: Self::NAME,
                state_dim: 3,
                action_dim: 1,
                action_low: vec![-params.max_torque],
                action_high: vec![params.max_torque],
                max_steps,
                dt: params.dt,
            },
            params,
            state: PendulumState { theta: PI, theta_dot: 0.0 },
            steps: 0,
        }
    }

    pub fn state(&self) -> PendulumState {
        self.state
    }

    pub fn set_state(&mut self, state: PendulumState) {
        self.state = state;
        self.steps = 0;
    }

    pub fn observation(&self) -> Vec<f64> {
        vec![libm::cos(self.state.theta), libm::sin(self.state.theta), self.state.theta_dot]
    }
}

impl Environment for Pendulum {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut Rng) -> Vec<f64> {
        let theta = rng.random_range(-PI..PI);
        let theta_dot = rng.random_range(-1.0..1.0);
        self.set_state(PendulumState { theta, theta_dot });
        self.observation()
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        check_len("pendulum action", 1, action.len())?;
        let (next, reward) = pendulum_step(&self.params, self.state, action[0]);
        self.state = next;
        self.steps += 1;
        Ok(Step {
            observation: self.observation(),
            reward,
            task_reward: reward,
            terminated: false,
            truncated: self.steps >= self.spec.max_steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn energy(p: &PendulumParams, s: PendulumState) -> f64 {
        0.5 * s.theta_dot * s.theta_dot + 3.0 * p.gravity / (2.0 * p.length) * libm::cos(s.theta)
    }

    #[test]
    fn hanging_rest_is_an_equilibrium() {
        let p = PendulumParams::default();
        let s = PendulumState { theta: PI, theta_dot: 0.0 };
        let (next, _) = pendulum_step(&p, s, 0.0);
        assert_eq!(next.theta, PI);
        assert!(next.theta_dot.abs() < 1e-14);
    }

    #[test]
    fn upright_rest_holds_for_one_step() {
        let p = PendulumParams::default();
        let (next, r) = pendulum_step(&p, PendulumState { theta: 0.0, theta_dot: 0.0 }, 0.0);
        assert_eq!(next, PendulumState { theta: 0.0, theta_dot: 0.0 });
        assert_eq!(r, 0.0);
    }

    #[test]
    fn energy_drift_is_integrator_error_only() {
        let p = PendulumParams::default();
        let mut fine_p = p;
        fine_p.dt = p.dt / 100.0;
        let start = PendulumState { theta: 2.0, theta_dot: 0.5 };
        let (mut coarse, mut fine) = (start, start);
        for _ in 0..10 {
            coarse = pendulum_step(&p, coarse, 0.0).0;
            for _ in 0..100 {
                fine = pendulum_step(&fine_p, fine, 0.0).0;
            }
            assert!(coarse.theta_dot.abs() < p.max_speed);
        }
        let e0 = energy(&p, start);
        let fine_drift = (energy(&p, fine) - e0).abs();
        let coarse_drift = (energy(&p, coarse) - e0).abs();
        // symplectic Euler keeps the energy error O(dt): the fine run is the reference
        assert!(fine_drift < 0.02, "fine drift {fine_drift}");
        assert!(coarse_drift < 1.0, "coarse drift {coarse_drift}");
        assert!((coarse.theta - fine.theta).abs() < 0.1);
    }

    #[test]
    fn reward_bounds() {
        let p = PendulumParams::default();
        let worst = -(PI * PI + 0.1 * 64.0 + 0.001 * 4.0);
        for i in 0..200 {
            let th = -10.0 + 0.1 * i as f64;
            for &(w, u) in &[(8.0, 2.0), (-8.0, -2.0), (0.0, 5.0), (3.0, 0.0)] {
                let (_, r) = pendulum_step(&p, PendulumState { theta: th, theta_dot: w }, u);
                assert!(r <= 0.0 && r >= worst);
            }
        }
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI + 0.5) - (-PI + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn truncates_at_step_limit() {
        let mut env = Pendulum::new(3);
        env.reset(&mut rng_from_seed(0));
        let flags: Vec<(bool, bool)> = (0..3)
            .map(|_| {
                let s = env.step(&[0.0]).unwrap();
                (s.terminated, s.truncated)
            })
            .collect();
        assert_eq!(flags, vec![(false, false), (false, false), (false, true)]);
        assert!(env.step(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn deterministic_given_seed_and_actions() {
        let run = || {
            let mut env = Pendulum::new(50);
            let mut obs = env.reset(&mut rng_from_seed(42));
            for k in 0..50 {
                obs = env.step(&[libm::sin(k as f64)]).unwrap().observation;
            }
            obs
        };
        assert_eq!(run(), run());
    }
}
