//! Finite-difference check of the actor's backpropagation.
//!
//! With [`SpikeMode::Smoothed`] the actor is a differentiable function of
//! its parameters whose exact derivative is what [`actor_backward`]
//! computes, so central differences of the scalar `sum(dL/da * a)` must
//! agree with it.

use crate::actor::{actor_backward, ActorConfig, ActorGrads, ActorParams, SpikeMode};
use crate::error::Result;
use crate::surrogate::SurrogateSpec;
use crate::tensor::{Matrix, ParamSet, Rng};

pub const DEFAULT_STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct GroupError {
    pub name: String,
    /// `|g - fd| / max(|g|, |fd|)` in the Euclidean norm over the group.
    pub rel_error: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradcheckReport {
    pub groups: Vec<GroupError>,
}

impl GradcheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.groups.iter().fold(0.0, |m, g| m.max(g.rel_error))
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_rel_error() < tol
    }

    /// Worst error per group across several reports.
    pub fn merge_worst(reports: &[GradcheckReport]) -> GradcheckReport {
        let mut groups: Vec<GroupError> = Vec::new();
        for r in reports {
            for g in &r.groups {
                match groups.iter_mut().find(|x| x.name == g.name) {
                    Some(x) if g.rel_error > x.rel_error => *x = g.clone(),
                    Some(_) => {}
                    None => groups.push(g.clone()),
                }
            }
        }
        GradcheckReport { groups }
    }
}

/// Relative error between two gradient vectors.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    let na = analytic.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nn = numeric.iter().map(|x| x * x).sum::<f64>().sqrt();
    let denom = na.max(nn);
    if denom == 0.0 {
        0.0
    } else {
        diff / denom
    }
}

fn smoothed_objective(actor: &ActorParams, states: &Matrix, dl_da: &Matrix, spec: SurrogateSpec) -> Result<f64> {
    let trace = actor.forward_batch(states, SpikeMode::Smoothed(spec))?;
    Ok(trace
        .action
        .data()
        .iter()
        .zip(dl_da.data())
        .map(|(a, g)| a * g)
        .sum())
}

/// Compare backpropagation against central differences for one actor and
/// one batch of inputs.
pub fn check_actor(
    actor: &ActorParams,
    states: &Matrix,
    dl_da: &Matrix,
    spec: SurrogateSpec,
    step: f64,
) -> Result<GradcheckReport> {
    let trace = actor.forward_batch(states, SpikeMode::Smoothed(spec))?;
    let analytic: ActorGrads = actor_backward(actor, &trace, dl_da, &spec)?;

    let mut probe = actor.clone();
    let names: Vec<String> = actor.named_params().into_iter().map(|(n, _)| n).collect();
    let mut groups = Vec::with_capacity(names.len());
    for (idx, (name, g)) in names.iter().zip(analytic.as_list()).enumerate() {
        let mut numeric = vec![0.0; g.len()];
        for (e, slot) in numeric.iter_mut().enumerate() {
            let orig = probe.params_mut()[idx].data()[e];
            probe.params_mut()[idx].data_mut()[e] = orig + step;
            let up = smoothed_objective(&probe, states, dl_da, spec)?;
            probe.params_mut()[idx].data_mut()[e] = orig - step;
            let down = smoothed_objective(&probe, states, dl_da, spec)?;
            probe.params_mut()[idx].data_mut()[e] = orig;
            *slot = (up - down) / (2.0 * step);
        }
        groups.push(GroupError {
            name: name.clone(),
            rel_error: relative_error(g.data(), &numeric),
            grad_norm: g.norm(),
        });
    }
    Ok(GradcheckReport { groups })
}

/// Sizes for a randomly drawn check network.
#[derive(Clone, Debug, PartialEq)]
pub struct GradcheckSizes {
    pub obs_dim: usize,
    pub encoder_pop: usize,
    pub hidden: Vec<usize>,
    pub action_dim: usize,
    pub decoder_pop: usize,
    pub timesteps: usize,
    pub batch: usize,
}

impl Default for GradcheckSizes {
    fn default() -> Self {
        GradcheckSizes {
            obs_dim: 3,
            encoder_pop: 10,
            hidden: vec![16, 16],
            action_dim: 2,
            decoder_pop: 10,
            timesteps: 5,
            batch: 2,
        }
    }
}

/// Draw a random actor, batch of states and upstream gradient from `seed`
/// and check it.
pub fn check_random(sizes: &GradcheckSizes, spec: SurrogateSpec, seed: u64) -> Result<GradcheckReport> {
    let mut rng = Rng::seed(seed);
    let mut cfg = ActorConfig::new(sizes.obs_dim, sizes.action_dim, 1.0);
    cfg.encoder_pop = sizes.encoder_pop;
    cfg.decoder_pop = sizes.decoder_pop;
    cfg.hidden = sizes.hidden.clone();
    cfg.timesteps = sizes.timesteps;
    cfg.vth = spec.vth();
    let mut actor = ActorParams::init(&cfg, &mut rng)?;
    // Jitter the receptive fields so mu and sigma gradients are generic.
    for x in actor.encoder.mu.data_mut() {
        *x += rng.uniform_range(-0.05, 0.05);
    }
    for x in actor.encoder.sigma.data_mut() {
        *x *= rng.uniform_range(0.8, 1.2);
    }
    let mut states = Matrix::zeros(sizes.batch, sizes.obs_dim);
    states
        .data_mut()
        .iter_mut()
        .for_each(|x| *x = rng.uniform_range(-1.0, 1.0));
    let mut dl_da = Matrix::zeros(sizes.batch, sizes.action_dim);
    dl_da
        .data_mut()
        .iter_mut()
        .for_each(|x| *x = rng.uniform_range(-1.0, 1.0));
    check_actor(&actor, &states, &dl_da, spec, DEFAULT_STEP)
}
