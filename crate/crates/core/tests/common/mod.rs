//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use sgrl::actor::{ActorParams, SpikeMode};
use sgrl::critic::MlpParams;
use sgrl::surrogate::SurrogateSpec;
use sgrl::tensor::{Matrix, ParamSet, Rng};

/// Composite Simpson rule with `panels` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Integral of the surrogate over `[vth - 2 w2, vth + 2 w2]`, split at the
/// breakpoints so every piece is smooth. Piece endpoints are evaluated a hair
/// inside the piece so jump discontinuities take their one-sided limits.
pub fn surrogate_integral(spec: &SurrogateSpec, panels: usize) -> f64 {
    let (vth, w2) = (spec.vth(), spec.w2());
    let mut cuts = vec![vth - 2.0 * w2, vth + 2.0 * w2];
    cuts.extend(spec.breakpoints());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let per_piece = panels / (cuts.len() - 1) + 2;
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let nudge = (b - a) * 1e-12;
            let f = |v: f64| spec.grad(v.clamp(a + nudge, b - nudge)).unwrap();
            simpson(f, a, b, per_piece)
        })
        .sum()
}

/// Norm-wise relative error, zero when both vectors vanish.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Central differences of `f` with respect to every entry of every
/// parameter of `net`, grouped as `net.params()`.
pub fn central_differences<P: ParamSet + Clone>(net: &P, step: f64, f: impl Fn(&P) -> f64) -> Vec<Vec<f64>> {
    let mut probe = net.clone();
    let groups = net.params().len();
    let mut out = Vec::with_capacity(groups);
    for g in 0..groups {
        let n = probe.params()[g].len();
        let mut grad = vec![0.0; n];
        for (e, slot) in grad.iter_mut().enumerate() {
            let orig = probe.params()[g].data()[e];
            probe.params_mut()[g].data_mut()[e] = orig + step;
            let up = f(&probe);
            probe.params_mut()[g].data_mut()[e] = orig - step;
            let down = f(&probe);
            probe.params_mut()[g].data_mut()[e] = orig;
            *slot = (up - down) / (2.0 * step);
        }
        out.push(grad);
    }
    out
}

/// `sum(dL/da * a)` for the smoothed-forward actor.
pub fn smoothed_actor_objective(actor: &ActorParams, states: &Matrix, dl_da: &Matrix, spec: SurrogateSpec) -> f64 {
    let trace = actor.forward_batch(states, SpikeMode::Smoothed(spec)).unwrap();
    trace.action.data().iter().zip(dl_da.data()).map(|(a, g)| a * g).sum()
}

pub fn random_matrix(rows: usize, cols: usize, lo: f64, hi: f64, rng: &mut Rng) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    m.data_mut().iter_mut().for_each(|x| *x = rng.uniform_range(lo, hi));
    m
}

/// Critic output for a single (s, a) pair.
pub fn q_value(net: &MlpParams, s: &[f64], a: &[f64]) -> f64 {
    net.forward(s, a).unwrap().0
}
