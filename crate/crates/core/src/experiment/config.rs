//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Every key has a default, so an
//! empty file is a valid configuration. Lists are comma separated.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::actor::ActorConfig;
use crate::envs::{EnvKind, EnvSpec};
use crate::error::{Error, Result};
use crate::surrogate::{SurrogateKind, SurrogateSpec};
use crate::td3::Td3Config;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    /// Surrogate shapes to compare; each is run for every seed.
    pub surrogates: Vec<SurrogateKind>,
    /// Plateau half-width (trapezoid only).
    pub surrogate_w1: f64,
    /// Support half-width, shared by all three shapes.
    pub surrogate_w2: f64,
    pub seeds: Vec<u64>,
    pub total_env_steps: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub td3: Td3Config,
    pub encoder_pop: usize,
    pub decoder_pop: usize,
    pub hidden: Vec<usize>,
    pub timesteps: usize,
    pub dc: f64,
    pub dv: f64,
    pub vth: f64,
    pub encoder_epsilon: f64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: EnvKind::Pendulum,
            surrogates: vec![SurrogateKind::Trapezoidal],
            surrogate_w1: 0.25,
            surrogate_w2: 0.75,
            seeds: vec![0, 1, 2],
            total_env_steps: 60_000,
            eval_every: 2000,
            eval_episodes: 5,
            td3: Td3Config::default(),
            encoder_pop: 10,
            decoder_pop: 10,
            hidden: vec![256, 256],
            timesteps: 5,
            dc: 0.5,
            dv: 0.75,
            vth: 0.5,
            encoder_epsilon: 0.5,
            output_dir: PathBuf::from("runs"),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::validation(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::format("config", format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.td3;
        match key {
            "env" => self.env = parse_num(key, value)?,
            "surrogate" => self.surrogates = parse_list(key, value)?,
            "surrogate_w1" => self.surrogate_w1 = parse_num(key, value)?,
            "surrogate_w2" => self.surrogate_w2 = parse_num(key, value)?,
            "seeds" => self.seeds = parse_list(key, value)?,
            "total_env_steps" => self.total_env_steps = parse_num(key, value)?,
            "eval_every" => self.eval_every = parse_num(key, value)?,
            "eval_episodes" => self.eval_episodes = parse_num(key, value)?,
            "gamma" => t.gamma = parse_num(key, value)?,
            "tau" => t.tau = parse_num(key, value)?,
            "actor_lr" => t.actor_lr = parse_num(key, value)?,
            "critic_lr" => t.critic_lr = parse_num(key, value)?,
            "policy_delay" => t.policy_delay = parse_num(key, value)?,
            "target_noise_std" => t.target_noise_std = parse_num(key, value)?,
            "target_noise_clip" => t.target_noise_clip = parse_num(key, value)?,
            "exploration_noise_std" => t.exploration_noise_std = parse_num(key, value)?,
            "batch_size" => t.batch_size = parse_num(key, value)?,
            "warmup_steps" => t.warmup_steps = parse_num(key, value)?,
            "buffer_capacity" => t.buffer_capacity = parse_num(key, value)?,
            "critic_hidden" => t.critic_hidden = parse_list(key, value)?,
            "encoder_pop" => self.encoder_pop = parse_num(key, value)?,
            "decoder_pop" => self.decoder_pop = parse_num(key, value)?,
            "hidden" => self.hidden = parse_list(key, value)?,
            "timesteps" => self.timesteps = parse_num(key, value)?,
            "dc" => self.dc = parse_num(key, value)?,
            "dv" => self.dv = parse_num(key, value)?,
            "vth" => self.vth = parse_num(key, value)?,
            "encoder_epsilon" => self.encoder_epsilon = parse_num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(Error::validation(key, "unknown key")),
        }
        Ok(())
    }

    /// Every key, one per line, in a form [`ExperimentConfig::parse`] reads
    /// back unchanged.
    pub fn to_text(&self) -> String {
        let t = &self.td3;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("env", self.env.name().to_string());
        kv("surrogate", join(&self.surrogates));
        kv("surrogate_w1", self.surrogate_w1.to_string());
        kv("surrogate_w2", self.surrogate_w2.to_string());
        kv("seeds", join(&self.seeds));
        kv("total_env_steps", self.total_env_steps.to_string());
        kv("eval_every", self.eval_every.to_string());
        kv("eval_episodes", self.eval_episodes.to_string());
        kv("gamma", t.gamma.to_string());
        kv("tau", t.tau.to_string());
        kv("actor_lr", t.actor_lr.to_string());
        kv("critic_lr", t.critic_lr.to_string());
        kv("policy_delay", t.policy_delay.to_string());
        kv("target_noise_std", t.target_noise_std.to_string());
        kv("target_noise_clip", t.target_noise_clip.to_string());
        kv("exploration_noise_std", t.exploration_noise_std.to_string());
        kv("batch_size", t.batch_size.to_string());
        kv("warmup_steps", t.warmup_steps.to_string());
        kv("buffer_capacity", t.buffer_capacity.to_string());
        kv("critic_hidden", join(&t.critic_hidden));
        kv("encoder_pop", self.encoder_pop.to_string());
        kv("decoder_pop", self.decoder_pop.to_string());
        kv("hidden", join(&self.hidden));
        kv("timesteps", self.timesteps.to_string());
        kv("dc", self.dc.to_string());
        kv("dv", self.dv.to_string());
        kv("vth", self.vth.to_string());
        kv("encoder_epsilon", self.encoder_epsilon.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.surrogates.is_empty() {
            return Err(Error::validation("surrogate", "at least one kind is required"));
        }
        for (i, k) in self.surrogates.iter().enumerate() {
            if self.surrogates[..i].contains(k) {
                return Err(Error::validation("surrogate", format!("`{k}` listed twice")));
            }
            self.surrogate_spec(*k)?;
        }
        if self.seeds.is_empty() {
            return Err(Error::validation("seeds", "at least one seed is required"));
        }
        for (i, s) in self.seeds.iter().enumerate() {
            if self.seeds[..i].contains(s) {
                return Err(Error::validation("seeds", format!("seed {s} listed twice")));
            }
        }
        if self.eval_every == 0 {
            return Err(Error::validation("eval_every", "must be >= 1"));
        }
        if self.total_env_steps == 0 || self.total_env_steps % self.eval_every != 0 {
            return Err(Error::validation(
                "total_env_steps",
                format!("must be a positive multiple of eval_every ({})", self.eval_every),
            ));
        }
        if self.eval_episodes == 0 {
            return Err(Error::validation("eval_episodes", "must be >= 1"));
        }
        self.td3.validate()?;
        for (name, n) in [
            ("encoder_pop", self.encoder_pop),
            ("decoder_pop", self.decoder_pop),
            ("timesteps", self.timesteps),
        ] {
            if n == 0 {
                return Err(Error::validation(name, "must be >= 1"));
            }
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::validation("hidden", "layer widths must be >= 1"));
        }
        for (name, x) in [("dc", self.dc), ("dv", self.dv)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::validation(name, format!("must lie in [0, 1], got {x}")));
            }
        }
        if !(self.vth > 0.0 && self.vth.is_finite()) {
            return Err(Error::validation("vth", format!("must be > 0, got {}", self.vth)));
        }
        if !(self.encoder_epsilon > 0.0 && self.encoder_epsilon < 1.0) {
            return Err(Error::validation(
                "encoder_epsilon",
                format!("must lie in (0, 1), got {}", self.encoder_epsilon),
            ));
        }
        Ok(())
    }

    /// The surrogate of the given shape built from the configured widths.
    /// Rectangular and triangular shapes use `surrogate_w2` as their width.
    pub fn surrogate_spec(&self, kind: SurrogateKind) -> Result<SurrogateSpec> {
        let spec = match kind {
            SurrogateKind::Rectangular => SurrogateSpec::rectangular(self.surrogate_w2, self.vth),
            SurrogateKind::Triangular => SurrogateSpec::triangular(self.surrogate_w2, self.vth),
            SurrogateKind::Trapezoidal => SurrogateSpec::trapezoidal(self.surrogate_w1, self.surrogate_w2, self.vth),
        };
        spec.map_err(|e| match e {
            Error::Validation { field, reason } if field != "vth" => Error::Validation {
                field: if field == "w1" { "surrogate_w1" } else { "surrogate_w2" }.to_string(),
                reason,
            },
            e => e,
        })
    }

    pub fn actor_config(&self, env: &EnvSpec) -> ActorConfig {
        let mut a = ActorConfig::new(env.state_dim, env.action_dim, 1.0);
        a.action_bound = env.action_bound.clone();
        a.encoder_pop = self.encoder_pop;
        a.decoder_pop = self.decoder_pop;
        a.hidden = self.hidden.clone();
        a.timesteps = self.timesteps;
        a.dc = self.dc;
        a.dv = self.dv;
        a.vth = self.vth;
        a.encoder_epsilon = self.encoder_epsilon;
        a
    }
}
