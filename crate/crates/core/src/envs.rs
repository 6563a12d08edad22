//! Built-in continuous-control tasks.
//!
//! Both environments return observations that are already normalised into
//! roughly `[-1, 1]`, the range the encoder's receptive fields cover.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct EnvSpec {
    pub state_dim: usize,
    pub action_dim: usize,
    pub action_bound: Vec<f64>,
    pub max_episode_steps: usize,
    /// Per-dimension `(offset, scale)`: `normalised = (raw - offset) / scale`.
    pub state_normalizer: Vec<(f64, f64)>,
}

impl EnvSpec {
    pub fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.state_normalizer)
            .map(|(x, (o, s))| (x - o) / s)
            .collect()
    }

    /// Clamp each component into `[-bound, bound]`.
    pub fn clamp_action(&self, action: &[f64]) -> Vec<f64> {
        action
            .iter()
            .zip(&self.action_bound)
            .map(|(a, b)| a.clamp(-b, *b))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// Episode is over.
    pub done: bool,
    /// The episode ended only because it hit the step limit; the state is
    /// not terminal and the value should still be bootstrapped from it.
    pub truncated: bool,
}

/// Common reset/step contract.
pub trait Env {
    fn spec(&self) -> &EnvSpec;
    fn reset(&mut self, rng: &mut Rng) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;
}

fn check_action(spec: &EnvSpec, action: &[f64]) -> Result<Vec<f64>> {
    if action.len() != spec.action_dim {
        return Err(Error::shape(
            "env step",
            format!("action has {} entries, env expects {}", action.len(), spec.action_dim),
        ));
    }
    if let Some(a) = action.iter().find(|a| !a.is_finite()) {
        return Err(Error::contract(format!("env step: non-finite action {a}")));
    }
    Ok(spec.clamp_action(action))
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut x = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

pub const PENDULUM_MAX_SPEED: f64 = 8.0;
pub const PENDULUM_MAX_TORQUE: f64 = 2.0;
const G: f64 = 10.0;
const M: f64 = 1.0;
const L: f64 = 1.0;
const DT: f64 = 0.05;

/// Angle measured from upright.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendulumState {
    pub theta: f64,
    pub theta_dot: f64,
}

impl PendulumState {
    /// Rod pendulum energy with `I = m l^2 / 3`, zero at upright rest.
    pub fn energy(&self) -> f64 {
        0.5 * (M * L * L / 3.0) * self.theta_dot * self.theta_dot + M * G * (L / 2.0) * (self.theta.cos() - 1.0)
    }
}

/// One semi-implicit Euler step. The reward scores the state the torque was
/// applied in. Torque is clamped to the bound.
pub fn pendulum_dynamics(state: PendulumState, torque: f64) -> (PendulumState, f64) {
    let u = torque.clamp(-PENDULUM_MAX_TORQUE, PENDULUM_MAX_TORQUE);
    let th = wrap_angle(state.theta);
    let cost = th * th + 0.1 * state.theta_dot * state.theta_dot + 0.001 * u * u;
    let acc = 3.0 * G / (2.0 * L) * state.theta.sin() + 3.0 / (M * L * L) * u;
    let theta_dot = (state.theta_dot + acc * DT).clamp(-PENDULUM_MAX_SPEED, PENDULUM_MAX_SPEED);
    let theta = wrap_angle(state.theta + theta_dot * DT);
    (PendulumState { theta, theta_dot }, -cost)
}

/// Swing-up: observations `[cos θ, sin θ, θ̇ / 8]`.
#[derive(Clone, Debug)]
pub struct Pendulum {
    spec: EnvSpec,
    pub state: PendulumState,
    steps: usize,
}

impl Default for Pendulum {
    fn default() -> Self {
        Self::new()
    }
}

impl Pendulum {
    pub fn new() -> Self {
        Pendulum {
            spec: EnvSpec {
                state_dim: 3,
                action_dim: 1,
                action_bound: vec![PENDULUM_MAX_TORQUE],
                max_episode_steps: 200,
                state_normalizer: vec![(0.0, 1.0), (0.0, 1.0), (0.0, PENDULUM_MAX_SPEED)],
            },
            state: PendulumState {
                theta: PI,
                theta_dot: 0.0,
            },
            steps: 0,
        }
    }

    /// Put the pendulum in a given state and return its observation.
    pub fn set_state(&mut self, state: PendulumState) -> Vec<f64> {
        self.state = state;
        self.steps = 0;
        self.observe()
    }

    fn observe(&self) -> Vec<f64> {
        let s = self.state;
        self.spec.normalize(&[s.theta.cos(), s.theta.sin(), s.theta_dot])
    }
}

impl Env for Pendulum {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut Rng) -> Vec<f64> {
        let theta = wrap_angle(rng.uniform_range(-PI, PI));
        let theta_dot = rng.uniform_range(-1.0, 1.0);
        self.set_state(PendulumState { theta, theta_dot })
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let a = check_action(&self.spec, action)?;
        let (next, reward) = pendulum_dynamics(self.state, a[0]);
        self.state = next;
        self.steps += 1;
        let done = self.steps >= self.spec.max_episode_steps;
        Ok(StepResult {
            obs: self.observe(),
            reward,
            done,
            truncated: done,
        })
    }
}

/// Drive a point on a line to the origin: `x' = x + 0.1 u`, reward `-x'^2`.
#[derive(Clone, Debug)]
pub struct Reach1d {
    spec: EnvSpec,
    pub position: f64,
    steps: usize,
}

impl Default for Reach1d {
    fn default() -> Self {
        Self::new()
    }
}

impl Reach1d {
    pub fn new() -> Self {
        Reach1d {
            spec: EnvSpec {
                state_dim: 1,
                action_dim: 1,
                action_bound: vec![1.0],
                max_episode_steps: 100,
                state_normalizer: vec![(0.0, 1.0)],
            },
            position: 0.0,
            steps: 0,
        }
    }

    pub fn set_position(&mut self, x: f64) -> Vec<f64> {
        self.position = x;
        self.steps = 0;
        self.spec.normalize(&[x])
    }
}

impl Env for Reach1d {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut Rng) -> Vec<f64> {
        let x = rng.uniform_range(-1.0, 1.0);
        self.set_position(x)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let a = check_action(&self.spec, action)?;
        self.position += 0.1 * a[0];
        self.steps += 1;
        let done = self.steps >= self.spec.max_episode_steps;
        Ok(StepResult {
            obs: self.spec.normalize(&[self.position]),
            reward: -self.position * self.position,
            done,
            truncated: done,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvKind {
    Pendulum,
    Reach1d,
}

impl EnvKind {
    pub fn make(self) -> Box<dyn Env + Send> {
        match self {
            EnvKind::Pendulum => Box::new(Pendulum::new()),
            EnvKind::Reach1d => Box::new(Reach1d::new()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Pendulum => "pendulum",
            EnvKind::Reach1d => "reach1d",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pendulum" => Ok(EnvKind::Pendulum),
            "reach1d" | "reach" => Ok(EnvKind::Reach1d),
            other => Err(Error::validation(
                "env",
                format!("unknown environment `{other}` (expected pendulum or reach1d)"),
            )),
        }
    }
}
