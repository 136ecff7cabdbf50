use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::{EnvSpec, Environment, Step};
use crate::error::check_len;
use crate::rng::Rng;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMassState {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMassParams {
    pub dt: f64,
    pub max_accel: f64,
    pub goal: [f64; 2],
    pub goal_radius: f64,
    /// Initial positions are drawn uniformly from `[-start_range, start_range]^2`.
    pub start_range: f64,
    /// Walls at `|x| = arena` and `|y| = arena`; hitting one stops that
    /// velocity component.
    pub arena: f64,
}

impl Default for PointMassParams {
    fn default() -> Self {
        Self {
            dt: 0.2,
            max_accel: 2.0,
            goal: [0.0, 0.0],
            goal_radius: 0.1,
            start_range: 1.0,
            arena: 2.0,
        }
    }
}

/// Semi-implicit Euler step of a planar double integrator inside a walled
/// arena.
///
/// Returns the next state, `-|pos' - goal| - 0.01 |a|^2` and whether `pos'`
/// lies inside the goal radius.
pub fn pointmass_step(p: &PointMassParams, s: PointMassState, accel: [f64; 2]) -> (PointMassState, f64, bool) {
    let a = accel.map(|x| x.clamp(-p.max_accel, p.max_accel));
    let mut vel = [s.vel[0] + a[0] * p.dt, s.vel[1] + a[1] * p.dt];
    let mut pos = [s.pos[0] + vel[0] * p.dt, s.pos[1] + vel[1] * p.dt];
    for k in 0..2 {
        if pos[k].abs() > p.arena {
            pos[k] = pos[k].clamp(-p.arena, p.arena);
            vel[k] = 0.0;
        }
    }
    let dist = libm::hypot(pos[0] - p.goal[0], pos[1] - p.goal[1]);
    let reward = -dist - 0.01 * (a[0] * a[0] + a[1] * a[1]);
    (PointMassState { pos, vel }, reward, dist <= p.goal_radius)
}

/// Reach-the-goal task observed as `[x, y, vx, vy]`.
#[derive(Debug, Clone)]
pub struct PointMass {
    params: PointMassParams,
    spec: EnvSpec,
    state: PointMassState,
    steps: usize,
}

impl PointMass {
    pub const NAME: &'static str = "pointmass";

    pub fn new(max_steps: usize) -> Self {
        Self::with_params(PointMassParams::default(), max_steps)
    }

    pub fn with_params(params: PointMassParams, max_steps: usize) -> Self {
        Self {
            spec: EnvSpec {
                name: Self::NAME,
                state_dim: 4,
                action_dim: 2,
                action_low: vec![-params.max_accel; 2],
                action_high: vec![params.max_accel; 2],
                max_steps,
                dt: params.dt,
            },
            params,
            state: PointMassState { pos: [0.0; 2], vel: [0.0; 2] },
            steps: 0,
        }
    }

    pub fn state(&self) -> PointMassState {
        self.state
    }

    pub fn set_state(&mut self, state: PointMassState) {
        self.state = state;
        self.steps = 0;
    }

    fn observation(&self) -> Vec<f64> {
        let s = self.state;
        vec![s.pos[0], s.pos[1], s.vel[0], s.vel[1]]
    }
}

impl Environment for PointMass {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut Rng) -> Vec<f64> {
        let r = self.params.start_range;
        let pos = [rng.random_range(-r..r), rng.random_range(-r..r)];
        self.set_state(PointMassState { pos, vel: [0.0; 2] });
        self.observation()
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        check_len("point-mass action", 2, action.len())?;
        let (next, reward, at_goal) = pointmass_step(&self.params, self.state, [action[0], action[1]]);
        self.state = next;
        self.steps += 1;
        Ok(Step {
            observation: self.observation(),
            reward,
            task_reward: reward,
            terminated: at_goal,
            truncated: !at_goal && self.steps >= self.spec.max_steps,
        })
    }
}
