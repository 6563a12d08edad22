//! TD3 with the spiking actor in the actor slot.

use crate::actor::{actor_backward, ActorConfig, ActorParams, SpikeMode};
use crate::checkpoint;
use crate::critic::{CriticPair, MlpParams};
use crate::error::{Error, Result};
use crate::replay::{Batch, ReplayBuffer, Transition};
use crate::surrogate::SurrogateSpec;
use crate::tensor::{AdamState, Matrix, ParamSet, Rng};

/// Smallest receptive-field width kept after an actor update.
pub const MIN_SIGMA: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct Td3Config {
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub policy_delay: usize,
    pub target_noise_std: f64,
    pub target_noise_clip: f64,
    pub exploration_noise_std: f64,
    pub batch_size: usize,
    pub warmup_steps: usize,
    pub buffer_capacity: usize,
    pub critic_hidden: Vec<usize>,
}

impl Default for Td3Config {
    fn default() -> Self {
        Td3Config {
            gamma: 0.99,
            tau: 0.005,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            policy_delay: 2,
            target_noise_std: 0.2,
            target_noise_clip: 0.5,
            exploration_noise_std: 0.1,
            batch_size: 100,
            warmup_steps: 1000,
            buffer_capacity: 100_000,
            critic_hidden: vec![256, 256],
        }
    }
}

impl Td3Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::validation("gamma", format!("must lie in (0, 1], got {}", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::validation("tau", format!("must lie in (0, 1], got {}", self.tau)));
        }
        for (name, lr) in [("actor_lr", self.actor_lr), ("critic_lr", self.critic_lr)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::validation(name, format!("must be > 0, got {lr}")));
            }
        }
        if self.policy_delay == 0 {
            return Err(Error::validation("policy_delay", "must be >= 1"));
        }
        for (name, x) in [
            ("target_noise_std", self.target_noise_std),
            ("target_noise_clip", self.target_noise_clip),
            ("exploration_noise_std", self.exploration_noise_std),
        ] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::validation(name, format!("must be >= 0, got {x}")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch_size", "must be >= 1"));
        }
        if self.buffer_capacity < self.batch_size {
            return Err(Error::validation("buffer_capacity", "must be at least batch_size"));
        }
        if self.critic_hidden.iter().any(|&h| h == 0) {
            return Err(Error::validation("critic_hidden", "layer widths must be >= 1"));
        }
        Ok(())
    }
}

/// Metrics from one [`Td3State::train_step`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepMetrics {
    pub critic_loss1: f64,
    pub critic_loss2: f64,
    /// Mean `Q1(s, pi(s))` before the actor update, when one happened.
    pub mean_q: Option<f64>,
}

/// Clipped double-Q target for one transition.
pub fn td_target(r: f64, done: f64, q1_next: f64, q2_next: f64, gamma: f64) -> f64 {
    r + gamma * (1.0 - done) * q1_next.min(q2_next)
}

/// `target <- tau * live + (1 - tau) * target` for every parameter.
pub fn soft_update<P: ParamSet>(live: &P, target: &mut P, tau: f64) -> Result<()> {
    let src = live.params();
    let dst = target.params_mut();
    if src.len() != dst.len() {
        return Err(Error::shape(
            "soft_update",
            format!("{} live parameters, {} target parameters", src.len(), dst.len()),
        ));
    }
    for (t, l) in dst.into_iter().zip(src) {
        t.lerp_toward(l, tau)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Td3State {
    pub actor: ActorParams,
    pub actor_target: ActorParams,
    pub critics: CriticPair,
    pub critics_target: CriticPair,
    pub buffer: ReplayBuffer,
    pub actor_opt: AdamState,
    pub critic1_opt: AdamState,
    pub critic2_opt: AdamState,
    /// Number of critic updates performed so far.
    pub update_count: u64,
}

impl Td3State {
    pub fn new(actor_cfg: &ActorConfig, cfg: &Td3Config, rng: &mut Rng) -> Result<Self> {
        cfg.validate()?;
        let actor = ActorParams::init(actor_cfg, rng)?;
        let critics = CriticPair::init(actor_cfg.obs_dim, actor_cfg.action_dim, &cfg.critic_hidden, rng);
        let actor_opt = AdamState::new(&actor.params(), cfg.actor_lr);
        let critic1_opt = AdamState::new(&critics.q1.params(), cfg.critic_lr);
        let critic2_opt = AdamState::new(&critics.q2.params(), cfg.critic_lr);
        Ok(Td3State {
            actor_target: actor.clone(),
            critics_target: critics.clone(),
            actor,
            critics,
            buffer: ReplayBuffer::new(cfg.buffer_capacity),
            actor_opt,
            critic1_opt,
            critic2_opt,
            update_count: 0,
        })
    }

    pub fn action_bound(&self) -> &[f64] {
        &self.actor.action_bound
    }

    fn clamp_to_bounds(&self, a: f64, dim: usize) -> f64 {
        let b = self.actor.action_bound[dim];
        a.clamp(-b, b)
    }

    /// `y = r + gamma (1 - d) min(Q1'(s', a'), Q2'(s', a'))` with smoothed
    /// target action `a' = clamp(pi'(s') + clip(noise))`.
    pub fn compute_target(&self, cfg: &Td3Config, batch: &Batch, rng: &mut Rng) -> Result<Vec<f64>> {
        if batch.is_empty() {
            return Err(Error::contract("compute_target on an empty batch"));
        }
        let trace = self.actor_target.forward_batch(&batch.s_next, SpikeMode::Hard)?;
        let mut a_next = trace.action;
        let na = a_next.cols();
        for r in 0..a_next.rows() {
            for i in 0..na {
                let noise = rng
                    .gauss(0.0, cfg.target_noise_std)?
                    .clamp(-cfg.target_noise_clip, cfg.target_noise_clip);
                let a = self.clamp_to_bounds(a_next.get(r, i) + noise, i);
                a_next.set(r, i, a);
            }
        }
        let (q1, _) = self.critics_target.q1.forward_batch(&batch.s_next, &a_next)?;
        let (q2, _) = self.critics_target.q2.forward_batch(&batch.s_next, &a_next)?;
        Ok((0..batch.len())
            .map(|b| td_target(batch.r[b], batch.done[b], q1[b], q2[b], cfg.gamma))
            .collect())
    }

    /// One Adam step on each critic's mean squared TD error. Returns the
    /// losses measured before the step.
    pub fn critic_update(&mut self, batch: &Batch, targets: &[f64]) -> Result<(f64, f64)> {
        if targets.len() != batch.len() {
            return Err(Error::shape(
                "critic_update",
                format!("{} targets for a batch of {}", targets.len(), batch.len()),
            ));
        }
        let l1 = regress(&mut self.critics.q1, &mut self.critic1_opt, batch, targets)?;
        let l2 = regress(&mut self.critics.q2, &mut self.critic2_opt, batch, targets)?;
        Ok((l1, l2))
    }

    /// Delayed policy step: ascend `Q1(s, pi(s))`. Returns the batch mean of
    /// `Q1` before the step.
    pub fn actor_update(&mut self, cfg: &Td3Config, batch: &Batch, spec: &SurrogateSpec) -> Result<f64> {
        self.actor_update_with_mode(cfg, batch, spec, SpikeMode::Hard)
    }

    /// As [`Td3State::actor_update`], choosing how the actor's forward pass
    /// fires.
    pub fn actor_update_with_mode(
        &mut self,
        cfg: &Td3Config,
        batch: &Batch,
        spec: &SurrogateSpec,
        mode: SpikeMode,
    ) -> Result<f64> {
        if self.update_count % cfg.policy_delay as u64 != 0 {
            return Err(Error::contract(format!(
                "actor_update at update {} with policy_delay {}",
                self.update_count, cfg.policy_delay
            )));
        }
        let n = batch.len();
        let trace = self.actor.forward_batch(&batch.s, mode)?;
        let (q, cache) = self.critics.q1.forward_batch(&batch.s, &trace.action)?;
        let mean_q = q.iter().sum::<f64>() / n as f64;
        let mut dl_da = self.critics.q1.action_grad_batch(&cache, self.actor.action_dim())?;
        // Minimise -mean Q.
        dl_da.scale(-1.0 / n as f64);
        let grads = actor_backward(&self.actor, &trace, &dl_da, spec)?;
        self.actor_opt.apply(&mut self.actor.params_mut(), &grads.as_list())?;
        self.actor.clamp_sigma(MIN_SIGMA);
        Ok(mean_q)
    }

    /// Greedy or exploratory action for one observation.
    pub fn select_action(&self, cfg: &Td3Config, s: &[f64], rng: &mut Rng, explore: bool) -> Result<Vec<f64>> {
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::contract("select_action on a non-finite observation"));
        }
        let mut a = self.actor.act(s)?;
        if explore {
            for (i, ai) in a.iter_mut().enumerate() {
                let noisy = *ai + rng.gauss(0.0, cfg.exploration_noise_std)?;
                *ai = self.clamp_to_bounds(noisy, i);
            }
        }
        Ok(a)
    }

    pub fn push(&mut self, t: Transition) {
        self.buffer.push(t);
    }

    /// Sample, regress both critics, and every `policy_delay` updates take an
    /// actor step followed by soft target updates.
    pub fn train_step(&mut self, cfg: &Td3Config, spec: &SurrogateSpec, rng: &mut Rng) -> Result<StepMetrics> {
        if self.buffer.len() < cfg.batch_size {
            return Err(Error::NotReady {
                have: self.buffer.len(),
                need: cfg.batch_size,
            });
        }
        let batch = self.buffer.sample(cfg.batch_size, rng)?;
        let targets = self.compute_target(cfg, &batch, rng)?;
        let (critic_loss1, critic_loss2) = self.critic_update(&batch, &targets)?;
        self.update_count += 1;
        let mut mean_q = None;
        if self.update_count % cfg.policy_delay as u64 == 0 {
            mean_q = Some(self.actor_update(cfg, &batch, spec)?);
            self.soft_update_targets(cfg.tau)?;
        }
        Ok(StepMetrics {
            critic_loss1,
            critic_loss2,
            mean_q,
        })
    }

    pub fn soft_update_targets(&mut self, tau: f64) -> Result<()> {
        soft_update(&self.actor, &mut self.actor_target, tau)?;
        soft_update(&self.critics, &mut self.critics_target, tau)
    }

    /// Every network, optimizer moment and counter, named for a checkpoint.
    pub fn checkpoint_entries(&self) -> Vec<(String, Matrix)> {
        let mut out = Vec::new();
        let mut add = |prefix: &str, set: Vec<(String, &Matrix)>| {
            out.extend(set.into_iter().map(|(n, m)| (format!("{prefix}.{n}"), m.clone())));
        };
        add("actor", self.actor.named_params());
        add("actor_target", self.actor_target.named_params());
        add("critic", self.critics.named_params());
        add("critic_target", self.critics_target.named_params());
        for (tag, opt) in [
            ("actor", &self.actor_opt),
            ("critic1", &self.critic1_opt),
            ("critic2", &self.critic2_opt),
        ] {
            for (i, (m, v)) in opt.first_moment.iter().zip(&opt.second_moment).enumerate() {
                out.push((format!("opt.{tag}.m{i}"), m.clone()));
                out.push((format!("opt.{tag}.v{i}"), v.clone()));
            }
            out.push((format!("opt.{tag}.step"), Matrix::filled(1, 1, opt.step_count as f64)));
        }
        out.push(("update_count".to_string(), Matrix::filled(1, 1, self.update_count as f64)));
        out
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let entries = self.checkpoint_entries();
        let refs: Vec<(String, &Matrix)> = entries.iter().map(|(n, m)| (n.clone(), m)).collect();
        checkpoint::write(path, &refs)
    }

    /// Restore every entry written by [`Td3State::checkpoint_entries`] into a
    /// state with the same architecture.
    pub fn restore(&mut self, entries: &[(String, Matrix)]) -> Result<()> {
        let current = self.checkpoint_entries();
        let names: Vec<String> = current.iter().map(|(n, _)| n.clone()).collect();
        let mut values: Vec<Matrix> = current.into_iter().map(|(_, m)| m).collect();
        checkpoint::restore(entries, &names, values.iter_mut().collect())?;
        let mut it = values.into_iter();
        let mut fill = |targets: Vec<&mut Matrix>| {
            for t in targets {
                *t = it.next().expect("entry count matches layout");
            }
        };
        fill(self.actor.params_mut());
        fill(self.actor_target.params_mut());
        fill(self.critics.params_mut());
        fill(self.critics_target.params_mut());
        for opt in [&mut self.actor_opt, &mut self.critic1_opt, &mut self.critic2_opt] {
            for i in 0..opt.first_moment.len() {
                opt.first_moment[i] = it.next().expect("layout");
                opt.second_moment[i] = it.next().expect("layout");
            }
            opt.step_count = it.next().expect("layout").get(0, 0) as u64;
        }
        self.update_count = it.next().expect("layout").get(0, 0) as u64;
        Ok(())
    }
}

fn regress(net: &mut MlpParams, opt: &mut AdamState, batch: &Batch, targets: &[f64]) -> Result<f64> {
    let n = batch.len() as f64;
    let (q, cache) = net.forward_batch(&batch.s, &batch.a)?;
    let resid: Vec<f64> = q.iter().zip(targets).map(|(q, y)| q - y).collect();
    let loss = resid.iter().map(|r| r * r).sum::<f64>() / n;
    let dl_dq: Vec<f64> = resid.iter().map(|r| 2.0 * r / n).collect();
    let grads = net.backward_params(&cache, &dl_dq)?;
    let grad_refs: Vec<&Matrix> = grads.iter().collect();
    opt.apply(&mut net.params_mut(), &grad_refs)?;
    Ok(loss)
}

pub fn compute_target(state: &Td3State, cfg: &Td3Config, batch: &Batch, rng: &mut Rng) -> Result<Vec<f64>> {
    state.compute_target(cfg, batch, rng)
}

pub fn train_step(state: &mut Td3State, cfg: &Td3Config, spec: &SurrogateSpec, rng: &mut Rng) -> Result<StepMetrics> {
    state.train_step(cfg, spec, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critic::DenseLayer;

    fn tiny_actor_cfg() -> ActorConfig {
        let mut c = ActorConfig::new(2, 1, 1.0);
        c.hidden = vec![8];
        c
    }

    fn tiny_cfg() -> Td3Config {
        Td3Config {
            batch_size: 4,
            buffer_capacity: 50,
            critic_hidden: vec![8],
            ..Td3Config::default()
        }
    }

    fn trap() -> SurrogateSpec {
        SurrogateSpec::trapezoidal(0.25, 0.75, 0.5).unwrap()
    }

    fn fill(state: &mut Td3State, n: usize, rng: &mut Rng) {
        for _ in 0..n {
            state.push(Transition {
                s: vec![rng.uniform_range(-1.0, 1.0), rng.uniform_range(-1.0, 1.0)],
                a: vec![rng.uniform_range(-1.0, 1.0)],
                r: rng.uniform_range(-1.0, 0.0),
                s_next: vec![rng.uniform_range(-1.0, 1.0), rng.uniform_range(-1.0, 1.0)],
                done: rng.uniform() < 0.2,
            });
        }
    }

    fn constant_net(input: usize, value: f64) -> MlpParams {
        MlpParams {
            layers: vec![DenseLayer {
                w: Matrix::zeros(1, input),
                b: Matrix::filled(1, 1, value),
            }],
        }
    }

    #[test]
    fn min_rule_arithmetic() {
        assert!((td_target(0.0, 0.0, 3.0, 5.0, 0.99) - 2.97).abs() < 1e-12);
        assert_eq!(td_target(1.0, 1.0, 100.0, -40.0, 0.99), 1.0);
        assert_eq!(td_target(0.25, 0.0, 7.0, 9.0, 0.0), 0.25);
    }

    #[test]
    fn compute_target_uses_smaller_target_critic() {
        let mut rng = Rng::seed(1);
        let cfg = tiny_cfg();
        let mut st = Td3State::new(&tiny_actor_cfg(), &cfg, &mut rng).unwrap();
        st.critics_target.q1 = constant_net(3, 3.0);
        st.critics_target.q2 = constant_net(3, 5.0);
        fill(&mut st, 10, &mut rng);
        let batch = st.buffer.sample(6, &mut rng).unwrap();
        let y = st.compute_target(&cfg, &batch, &mut rng).unwrap();
        for b in 0..6 {
            let expected = batch.r[b] + 0.99 * (1.0 - batch.done[b]) * 3.0;
            assert!((y[b] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn soft_update_mixing() {
        let live = Matrix::filled(2, 2, 1.0);
        for (tau, expected) in [(1.0, 1.0), (0.005, 0.005), (0.0, 0.0)] {
            let mut target = Matrix::zeros(2, 2);
            target.lerp_toward(&live, tau).unwrap();
            assert!(target.data().iter().all(|&x| x == expected), "tau {tau}");
        }
    }

    #[test]
    fn targets_start_equal_to_live() {
        let st = Td3State::new(&tiny_actor_cfg(), &tiny_cfg(), &mut Rng::seed(2)).unwrap();
        assert_eq!(st.actor, st.actor_target);
        assert_eq!(st.critics, st.critics_target);
    }

    #[test]
    fn not_ready_leaves_state_untouched() {
        let mut rng = Rng::seed(3);
        let cfg = tiny_cfg();
        let mut st = Td3State::new(&tiny_actor_cfg(), &cfg, &mut rng).unwrap();
        fill(&mut st, 3, &mut rng);
        let before = st.checkpoint_entries();
        let rng_before = rng.clone().next_u64();
        assert!(matches!(st.train_step(&cfg, &trap(), &mut rng), Err(Error::NotReady { .. })));
        assert_eq!(st.checkpoint_entries(), before);
        assert_eq!(rng.next_u64(), rng_before);
    }

    #[test]
    fn policy_delay_gating() {
        let mut rng = Rng::seed(4);
        let cfg = Td3Config {
            policy_delay: 2,
            ..tiny_cfg()
        };
        let mut st = Td3State::new(&tiny_actor_cfg(), &cfg, &mut rng).unwrap();
        fill(&mut st, 20, &mut rng);
        let mut actor_updates = Vec::new();
        for _ in 0..6 {
            let m = st.train_step(&cfg, &trap(), &mut rng).unwrap();
            actor_updates.push(m.mean_q.is_some());
        }
        assert_eq!(actor_updates, vec![false, true, false, true, false, true]);
        assert_eq!(st.actor_opt.step_count, 3);
        assert_eq!(st.critic1_opt.step_count, 6);
        // Off-schedule actor updates are refused.
        st.update_count = 7;
        let batch = st.buffer.sample(4, &mut rng).unwrap();
        assert!(matches!(st.actor_update(&cfg, &batch, &trap()), Err(Error::Contract(_))));
    }

    #[test]
    fn zero_residual_leaves_critic_unchanged() {
        let mut rng = Rng::seed(5);
        let cfg = tiny_cfg();
        let mut st = Td3State::new(&tiny_actor_cfg(), &cfg, &mut rng).unwrap();
        fill(&mut st, 10, &mut rng);
        let batch = st.buffer.sample(4, &mut rng).unwrap();
        let (q1, _) = st.critics.q1.forward_batch(&batch.s, &batch.a).unwrap();
        let before = st.critics.q1.clone();
        let (l1, _) = st.critic_update(&batch, &q1).unwrap();
        assert_eq!(l1, 0.0);
        assert_eq!(st.critics.q1, before);
    }

    #[test]
    fn single_sample_loss_is_squared_residual() {
        let mut rng = Rng::seed(6);
        let cfg = tiny_cfg();
        let mut st = Td3State::new(&tiny_actor_cfg(), &cfg, &mut rng).unwrap();
        st.critics.q1 = MlpParams {
            layers: vec![DenseLayer {
                w: Matrix::row_vector(&[1.0, 2.0, -1.0]),
                b: Matrix::filled(1, 1, 0.5),
            }],
        };
        st.critic1_opt = AdamState::new(&st.critics.q1.params(), cfg.critic_lr);
        let t = Transition {
            s: vec![0.5, -0.25],
            a: vec![0.75],
            r: 0.0,
            s_next: vec![0.0, 0.0],
            done: false,
        };
        let batch = Batch::from_transitions(&[&t]).unwrap();
        // q = 0.5 - 0.5 - 0.75 + 0.5 = -0.25
        let (l1, _) = st.critic_update(&batch, &[1.0]).unwrap();
        assert_eq!(l1, 1.5625);
    }

    #[test]
    fn flat_critic_leaves_actor_unchanged() {
        let mut rng = Rng::seed(7);
        let cfg = tiny_cfg();
        let mut st = Td3State::new(&tiny_actor_cfg(), &cfg, &mut rng).unwrap();
        st.critics.q1 = constant_net(3, 2.0);
        fill(&mut st, 10, &mut rng);
        let batch = st.buffer.sample(4, &mut rng).unwrap();
        let before = st.actor.clone();
        let q = st.actor_update(&cfg, &batch, &trap()).unwrap();
        assert_eq!(q, 2.0);
        assert_eq!(st.actor, before);
    }

    #[test]
    fn actor_ascends_linear_critic() {
        let mut rng = Rng::seed(8);
        let cfg = Td3Config {
            actor_lr: 1e-3,
            ..tiny_cfg()
        };
        let mut st = Td3State::new(&tiny_actor_cfg(), &cfg, &mut rng).unwrap();
        // q = a
        st.critics.q1 = MlpParams {
            layers: vec![DenseLayer {
                w: Matrix::row_vector(&[0.0, 0.0, 1.0]),
                b: Matrix::zeros(1, 1),
            }],
        };
        fill(&mut st, 20, &mut rng);
        let batch = st.buffer.sample(8, &mut rng).unwrap();
        let mode = SpikeMode::Smoothed(trap());
        let mean_a = |st: &Td3State| {
            let t = st.actor.forward_batch(&batch.s, mode).unwrap();
            t.action.data().iter().sum::<f64>() / 8.0
        };
        let before = mean_a(&st);
        st.actor_update_with_mode(&cfg, &batch, &trap(), mode).unwrap();
        assert!(mean_a(&st) > before);
    }

    #[test]
    fn select_action_contracts() {
        let mut rng = Rng::seed(9);
        let mut cfg = tiny_cfg();
        let st = Td3State::new(&tiny_actor_cfg(), &cfg, &mut rng).unwrap();
        let s = [0.3, -0.6];
        let greedy = st.select_action(&cfg, &s, &mut rng, false).unwrap();
        assert_eq!(greedy, st.select_action(&cfg, &s, &mut rng, false).unwrap());
        cfg.exploration_noise_std = 0.0;
        assert_eq!(greedy, st.select_action(&cfg, &s, &mut rng, true).unwrap());
        cfg.exploration_noise_std = 10.0;
        for _ in 0..100 {
            let a = st.select_action(&cfg, &s, &mut rng, true).unwrap();
            assert!(a[0].abs() <= 1.0);
        }
        assert!(st.select_action(&cfg, &[f64::NAN, 0.0], &mut rng, false).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = Rng::seed(10);
        let cfg = tiny_cfg();
        let mut st = Td3State::new(&tiny_actor_cfg(), &cfg, &mut rng).unwrap();
        fill(&mut st, 20, &mut rng);
        for _ in 0..4 {
            st.train_step(&cfg, &trap(), &mut rng).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.sgrl");
        st.save(&path).unwrap();
        let mut fresh = Td3State::new(&tiny_actor_cfg(), &cfg, &mut Rng::seed(99)).unwrap();
        fresh.restore(&checkpoint::read(&path).unwrap()).unwrap();
        assert_eq!(fresh.checkpoint_entries(), st.checkpoint_entries());
        assert_eq!(fresh.update_count, 4);
    }

    #[test]
    fn config_validation() {
        let bad = Td3Config {
            gamma: 0.0,
            ..Td3Config::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Validation { .. })));
        let bad = Td3Config {
            policy_delay: 0,
            ..Td3Config::default()
        };
        assert!(bad.validate().is_err());
        Td3Config::default().validate().unwrap();
    }
}
