//! Population encoder: Gaussian receptive fields feeding integrate-and-fire
//! units that reset by subtraction.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Receptive fields for `obs_dim` inputs, each covered by `pop_size` neurons.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    /// Centres, `obs_dim x pop_size`.
    pub mu: Matrix,
    /// Widths, `obs_dim x pop_size`, all positive.
    pub sigma: Matrix,
    /// Threshold margin; neurons fire above `1 - epsilon`.
    pub epsilon: f64,
}

impl EncoderParams {
    /// Centres evenly spaced over `[lo, hi]` for every input dimension, each
    /// width equal to the spacing between neighbouring centres.
    pub fn evenly_spaced(obs_dim: usize, pop_size: usize, lo: f64, hi: f64, epsilon: f64) -> Self {
        let spacing = if pop_size > 1 {
            (hi - lo) / (pop_size - 1) as f64
        } else {
            hi - lo
        };
        let mut mu = Matrix::zeros(obs_dim, pop_size);
        for i in 0..obs_dim {
            for j in 0..pop_size {
                let c = if pop_size > 1 {
                    lo + spacing * j as f64
                } else {
                    0.5 * (lo + hi)
                };
                mu.set(i, j, c);
            }
        }
        EncoderParams {
            mu,
            sigma: Matrix::filled(obs_dim, pop_size, spacing),
            epsilon,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.mu.rows()
    }

    pub fn pop_size(&self) -> usize {
        self.mu.cols()
    }

    /// Number of encoder neurons, `obs_dim * pop_size`.
    pub fn width(&self) -> usize {
        self.mu.len()
    }

    pub fn threshold(&self) -> f64 {
        1.0 - self.epsilon
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.shape() != self.sigma.shape() {
            return Err(Error::shape(
                "encoder",
                format!("mu {:?} vs sigma {:?}", self.mu.shape(), self.sigma.shape()),
            ));
        }
        if let Some(s) = self.sigma.data().iter().find(|s| !(**s > 0.0)) {
            return Err(Error::validation("sigma", format!("widths must be > 0, found {s}")));
        }
        let th = self.threshold();
        if !(th > 0.0 && th <= 1.0) {
            return Err(Error::validation(
                "epsilon",
                format!("encoder threshold 1 - epsilon must lie in (0, 1], got {th}"),
            ));
        }
        Ok(())
    }
}

/// Stimulus intensity of every encoder neuron, flattened in
/// `(input, neuron)` order.
pub fn encode_intensity(enc: &EncoderParams, state: &[f64]) -> Result<Vec<f64>> {
    if state.len() != enc.obs_dim() {
        return Err(Error::shape(
            "encode_intensity",
            format!("state has {} dims, encoder expects {}", state.len(), enc.obs_dim()),
        ));
    }
    let mut out = vec![0.0; enc.width()];
    intensity_into(enc, state, &mut out);
    Ok(out)
}

pub(crate) fn intensity_into(enc: &EncoderParams, state: &[f64], out: &mut [f64]) {
    let np = enc.pop_size();
    for (i, &s) in state.iter().enumerate() {
        for j in 0..np {
            let z = (s - enc.mu.get(i, j)) / enc.sigma.get(i, j);
            out[i * np + j] = (-0.5 * z * z).exp();
        }
    }
}

/// Deterministic spike train driven by constant intensities. Row `t` of the
/// result holds the spikes emitted at step `t + 1`.
pub fn encode_spikes(enc: &EncoderParams, intensity: &[f64], timesteps: usize) -> Matrix {
    let mut spikes = Matrix::zeros(timesteps, intensity.len());
    let th = enc.threshold();
    let mut v = vec![0.0; intensity.len()];
    for t in 0..timesteps {
        let row = spikes.row_mut(t);
        for ((vi, a), o) in v.iter_mut().zip(intensity).zip(row.iter_mut()) {
            *vi += a;
            if *vi > th {
                *o = 1.0;
                *vi -= th;
            }
        }
    }
    spikes
}
