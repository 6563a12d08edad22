//! Leaky integrate-and-fire layers with current and voltage decay.

use crate::error::{Error, Result};
use crate::surrogate::SurrogateSpec;
use crate::tensor::{gemm, Matrix, Rng, Transpose};

#[derive(Clone, Debug, PartialEq)]
pub struct LifLayerParams {
    /// `fan_out x fan_in`.
    pub w: Matrix,
    /// `fan_out x 1`.
    pub b: Matrix,
    pub dc: f64,
    pub dv: f64,
    pub vth: f64,
}

impl LifLayerParams {
    /// Uniform `±1/sqrt(fan_in)` initialisation for weights and biases.
    pub fn init(fan_in: usize, fan_out: usize, dc: f64, dv: f64, vth: f64, rng: &mut Rng) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let mut w = Matrix::zeros(fan_out, fan_in);
        w.data_mut()
            .iter_mut()
            .for_each(|x| *x = rng.uniform_range(-bound, bound));
        let mut b = Matrix::zeros(fan_out, 1);
        b.data_mut()
            .iter_mut()
            .for_each(|x| *x = rng.uniform_range(-bound, bound));
        LifLayerParams { w, b, dc, dv, vth }
    }

    pub fn fan_in(&self) -> usize {
        self.w.cols()
    }

    pub fn fan_out(&self) -> usize {
        self.w.rows()
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        if self.b.shape() != (self.fan_out(), 1) {
            return Err(Error::shape(
                "lif layer",
                format!("layer {index}: bias {:?} for {} outputs", self.b.shape(), self.fan_out()),
            ));
        }
        for (name, x) in [("dc", self.dc), ("dv", self.dv)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::validation(name, format!("decay must lie in [0, 1], got {x}")));
            }
        }
        if !(self.vth > 0.0) {
            return Err(Error::validation("vth", format!("threshold must be > 0, got {}", self.vth)));
        }
        Ok(())
    }
}

/// Neuron state `(c, v, o)` of one layer at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct LifState {
    pub c: Vec<f64>,
    pub v: Vec<f64>,
    pub o: Vec<f64>,
}

impl LifState {
    pub fn zeros(n: usize) -> Self {
        LifState {
            c: vec![0.0; n],
            v: vec![0.0; n],
            o: vec![0.0; n],
        }
    }
}

/// How a layer turns membrane voltage into output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpikeMode {
    /// Binary spikes, as used for acting and training.
    Hard,
    /// Encoder passes its intensities through and LIF layers emit the
    /// surrogate's antiderivative. The refractory gate still uses the hard
    /// threshold. Exists so finite differences can check backpropagation.
    Smoothed(SurrogateSpec),
}

/// One step of a single layer for a single sample.
pub fn lif_step(layer: &LifLayerParams, prev: &LifState, input: &[f64]) -> Result<LifState> {
    let n = layer.fan_out();
    if input.len() != layer.fan_in() || prev.c.len() != n || prev.v.len() != n || prev.o.len() != n {
        return Err(Error::shape(
            "lif_step",
            format!(
                "layer {}x{}, input {}, state ({}, {}, {})",
                n,
                layer.fan_in(),
                input.len(),
                prev.c.len(),
                prev.v.len(),
                prev.o.len()
            ),
        ));
    }
    let mut next = LifState::zeros(n);
    for r in 0..n {
        let drive: f64 = layer.w.row(r).iter().zip(input).map(|(w, x)| w * x).sum();
        let c = layer.dc * prev.c[r] + drive + layer.b.get(r, 0);
        let v = layer.dv * prev.v[r] * (1.0 - prev.o[r]) + c;
        next.c[r] = c;
        next.v[r] = v;
        next.o[r] = if v > layer.vth { 1.0 } else { 0.0 };
    }
    Ok(next)
}

/// Per-layer record of a batched run: row `t * batch + b` holds sample `b`
/// at step `t + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerTrace {
    pub c: Matrix,
    pub v: Matrix,
    pub o: Matrix,
}

/// Run one layer over all timesteps for a whole batch. `input` is laid out
/// like the rows of [`LayerTrace`].
pub(crate) fn run_layer(
    layer: &LifLayerParams,
    input: &Matrix,
    batch: usize,
    timesteps: usize,
    mode: SpikeMode,
) -> Result<LayerTrace> {
    let n = layer.fan_out();
    let rows = batch * timesteps;
    // All input currents in one product; the recurrence below is elementwise.
    let mut c = Matrix::zeros(rows, n);
    gemm(1.0, input, Transpose::No, &layer.w, Transpose::Yes, 0.0, &mut c)?;
    let mut v = Matrix::zeros(rows, n);
    let mut o = Matrix::zeros(rows, n);
    let bias = layer.b.data();
    let (dc, dv, vth) = (layer.dc, layer.dv, layer.vth);

    for t in 0..timesteps {
        for b in 0..batch {
            let r = t * batch + b;
            if t == 0 {
                let c_row = c.row_mut(r);
                for (ci, bi) in c_row.iter_mut().zip(bias) {
                    *ci += bi;
                }
                v.row_mut(r).copy_from_slice(c.row(r));
            } else {
                let p = r - batch;
                let (c_prev, c_cur) = split_rows(&mut c, p, r);
                let (v_prev, v_cur) = split_rows(&mut v, p, r);
                for i in 0..n {
                    let ci = dc * c_prev[i] + c_cur[i] + bias[i];
                    c_cur[i] = ci;
                    let gate = if v_prev[i] > vth { 0.0 } else { 1.0 };
                    v_cur[i] = dv * v_prev[i] * gate + ci;
                }
            }
            let v_row = v.row(r);
            let o_row = o.row_mut(r);
            match mode {
                SpikeMode::Hard => {
                    for (oi, &vi) in o_row.iter_mut().zip(v_row) {
                        *oi = if vi > vth { 1.0 } else { 0.0 };
                    }
                }
                SpikeMode::Smoothed(spec) => {
                    for (oi, &vi) in o_row.iter_mut().zip(v_row) {
                        *oi = spec.smoothed_step_unchecked(vi);
                    }
                }
            }
        }
    }
    Ok(LayerTrace { c, v, o })
}

/// Borrow row `prev` immutably and row `cur` mutably, `prev < cur`.
fn split_rows(m: &mut Matrix, prev: usize, cur: usize) -> (&[f64], &mut [f64]) {
    let cols = m.cols();
    let (head, tail) = m.data_mut().split_at_mut(cur * cols);
    (&head[prev * cols..(prev + 1) * cols], &mut tail[..cols])
}
