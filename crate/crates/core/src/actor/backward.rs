//! Backpropagation through time for the spiking actor.
//!
//! Forward recurrence of layer `k` (rows indexed by time):
//!
//! ```text
//! c_t = dc * c_{t-1} + W o^{k-1}_t + b
//! v_t = dv * v_{t-1} * g_t + c_t        g_t = 1 - [v_{t-1} > vth]
//! o_t = step(v_t)
//! ```
//!
//! The backward pass replaces `d step / dv` with the surrogate `z(v_t)` and
//! holds the refractory gate `g_t` constant, so
//!
//! ```text
//! dL/dv_t = dL/do_t * z(v_t) + dL/dv_{t+1} * dv * g_{t+1}
//! dL/dc_t = dL/dv_t + dL/dc_{t+1} * dc
//! dL/dW   = sum_t dL/dc_t (o^{k-1}_t)^T,   dL/db = sum_t dL/dc_t
//! ```
//!
//! Encoder spikes pass gradient straight through to the intensity `A` at
//! every step, giving `dL/dmu = sum_t dL/do^0_t * A * (s - mu) / sigma^2`
//! and `dL/dsigma = sum_t dL/do^0_t * A * (s - mu)^2 / sigma^3`.

use super::{ActorParams, ForwardTrace};
use crate::error::{Error, Result};
use crate::surrogate::SurrogateSpec;
use crate::tensor::{gemm, Matrix, ParamSet, Transpose};

/// Gradients with the same layout as [`ActorParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct ActorGrads {
    pub mu: Matrix,
    pub sigma: Matrix,
    /// `(dW, db)` per LIF layer.
    pub layers: Vec<(Matrix, Matrix)>,
    pub wa: Matrix,
    pub ba: Matrix,
}

impl ActorGrads {
    pub fn zeros_like(params: &ActorParams) -> Self {
        let z = |m: &Matrix| Matrix::zeros(m.rows(), m.cols());
        ActorGrads {
            mu: z(&params.encoder.mu),
            sigma: z(&params.encoder.sigma),
            layers: params.layers.iter().map(|l| (z(&l.w), z(&l.b))).collect(),
            wa: z(&params.decoder.wa),
            ba: z(&params.decoder.ba),
        }
    }

    /// Same order as [`ParamSet::params_mut`] on [`ActorParams`].
    pub fn as_list(&self) -> Vec<&Matrix> {
        let mut out = vec![&self.mu, &self.sigma];
        for (w, b) in &self.layers {
            out.push(w);
            out.push(b);
        }
        out.push(&self.wa);
        out.push(&self.ba);
        out
    }

    /// Named groups for reporting.
    pub fn named(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![("encoder.mu".to_string(), &self.mu), ("encoder.sigma".to_string(), &self.sigma)];
        for (k, (w, b)) in self.layers.iter().enumerate() {
            out.push((format!("layer{k}.w"), w));
            out.push((format!("layer{k}.b"), b));
        }
        out.push(("decoder.wa".to_string(), &self.wa));
        out.push(("decoder.ba".to_string(), &self.ba));
        out
    }
}

/// Gradient of `sum_b dL_da[b] . action[b]` with respect to every actor
/// parameter, summed over the batch. `dL_da` is `batch x action_dim`.
pub fn actor_backward(
    params: &ActorParams,
    trace: &ForwardTrace,
    dl_da: &Matrix,
    spec: &SurrogateSpec,
) -> Result<ActorGrads> {
    let batch = trace.batch;
    let steps = trace.timesteps;
    let na = params.action_dim();
    let ns = params.decoder.pop_size();
    check_trace(params, trace)?;
    if dl_da.shape() != (batch, na) {
        return Err(Error::shape(
            "actor_backward",
            format!("dL/da is {:?}, expected ({batch}, {na})", dl_da.shape()),
        ));
    }

    let mut grads = ActorGrads::zeros_like(params);

    // Through the squash a = bound * tanh(pre).
    let mut d_pre = Matrix::zeros(batch, na);
    for b in 0..batch {
        for i in 0..na {
            let th = trace.pre_action.get(b, i).tanh();
            d_pre.set(b, i, dl_da.get(b, i) * params.action_bound[i] * (1.0 - th * th));
        }
    }

    // Decoder: pre_i = wa_i . f_i + ba_i.
    let out_width = na * ns;
    let mut d_rates = Matrix::zeros(batch, out_width);
    for b in 0..batch {
        let f = trace.rates.row(b);
        for i in 0..na {
            let g = d_pre.get(b, i);
            let ba = grads.ba.get(i, 0);
            grads.ba.set(i, 0, ba + g);
            let wa_row = params.decoder.wa.row(i);
            let gw = grads.wa.row_mut(i);
            for j in 0..ns {
                gw[j] += g * f[i * ns + j];
                d_rates.set(b, i * ns + j, g * wa_row[j]);
            }
        }
    }

    // f = (1/T) sum_t o_t, so every step of the output layer sees dL/df / T.
    let mut d_out = Matrix::zeros(steps * batch, out_width);
    let inv_t = 1.0 / steps as f64;
    for t in 0..steps {
        for (d, g) in d_out.row_block_mut(t * batch, batch).iter_mut().zip(d_rates.data()) {
            *d = g * inv_t;
        }
    }

    for k in (0..params.layers.len()).rev() {
        let layer = &params.layers[k];
        let lt = &trace.layers[k];
        let n = layer.fan_out();
        let mut d_c = Matrix::zeros(steps * batch, n);
        // dL/dv_{t+1} * dv * gate_{t+1} and dc * dL/dc_{t+1}, per (b, i).
        let mut carry_v = vec![0.0; batch * n];
        let mut carry_c = vec![0.0; batch * n];
        for t in (0..steps).rev() {
            let v_blk = lt.v.row_block(t * batch, batch);
            let d_o = d_out.row_block(t * batch, batch);
            let dc_blk = d_c.row_block_mut(t * batch, batch);
            for j in 0..batch * n {
                let dv = d_o[j] * spec.grad_unchecked(v_blk[j]) + carry_v[j];
                let dc = dv + carry_c[j];
                dc_blk[j] = dc;
                carry_v[j] = dv * layer.dv;
                carry_c[j] = dc * layer.dc;
            }
            if t > 0 {
                let prev = lt.v.row_block((t - 1) * batch, batch);
                for (cv, &vp) in carry_v.iter_mut().zip(prev) {
                    *cv = if vp > layer.vth { 0.0 } else { *cv };
                }
            }
        }

        let input = if k == 0 { &trace.encoder_spikes } else { &trace.layers[k - 1].o };
        let (gw, gb) = &mut grads.layers[k];
        gemm(1.0, &d_c, Transpose::Yes, input, Transpose::No, 0.0, gw)?;
        *gb = d_c.column_sums();

        let mut d_in = Matrix::zeros(steps * batch, layer.fan_in());
        gemm(1.0, &d_c, Transpose::No, &layer.w, Transpose::No, 0.0, &mut d_in)?;
        d_out = d_in;
    }

    // d_out now holds dL/do^0_t for the encoder.
    let np = params.encoder.pop_size();
    let enc = &params.encoder;
    for b in 0..batch {
        let s = trace.states.row(b);
        let a = trace.intensity.row(b);
        for (i, &si) in s.iter().enumerate() {
            for j in 0..np {
                let e = i * np + j;
                let mut g_sum = 0.0;
                for t in 0..steps {
                    g_sum += d_out.get(t * batch + b, e);
                }
                let mu = enc.mu.get(i, j);
                let sigma = enc.sigma.get(i, j);
                let diff = si - mu;
                let base = g_sum * a[e];
                let s2 = sigma * sigma;
                let gm = grads.mu.get(i, j) + base * diff / s2;
                grads.mu.set(i, j, gm);
                let gs = grads.sigma.get(i, j) + base * diff * diff / (s2 * sigma);
                grads.sigma.set(i, j, gs);
            }
        }
    }

    Ok(grads)
}

fn check_trace(params: &ActorParams, trace: &ForwardTrace) -> Result<()> {
    let rows = trace.batch * trace.timesteps;
    let ok = trace.timesteps == params.timesteps
        && trace.layers.len() == params.layers.len()
        && trace.states.shape() == (trace.batch, params.obs_dim())
        && trace.encoder_spikes.shape() == (rows, params.encoder.width())
        && trace
            .layers
            .iter()
            .zip(&params.layers)
            .all(|(lt, l)| lt.v.shape() == (rows, l.fan_out()) && lt.o.shape() == (rows, l.fan_out()))
        && trace.pre_action.shape() == (trace.batch, params.action_dim());
    if ok {
        Ok(())
    } else {
        Err(Error::contract("actor_backward: trace does not match actor parameters"))
    }
}

impl ActorParams {
    /// Apply `f(param, grad)` over matching parameter/gradient pairs.
    pub fn zip_grads(&mut self, grads: &ActorGrads, mut f: impl FnMut(&mut Matrix, &Matrix)) {
        for (p, g) in self.params_mut().into_iter().zip(grads.as_list()) {
            f(p, g);
        }
    }
}
