//! Twin feedforward critics `Q(s, a)` with manual backpropagation.

use crate::error::{Error, Result};
use crate::tensor::{gemm, Matrix, ParamSet, Rng, Transpose};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    /// `fan_out x fan_in`.
    pub w: Matrix,
    /// `fan_out x 1`.
    pub b: Matrix,
}

/// Rectified-linear hidden layers and a linear scalar output. The input is
/// the state concatenated with the action.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<DenseLayer>,
}

/// Activations kept for the backward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticCache {
    /// Input to each layer (`batch x fan_in`); entry 0 is `s || a`.
    pub inputs: Vec<Matrix>,
    /// Pre-activation of each layer (`batch x fan_out`).
    pub pre: Vec<Matrix>,
}

impl CriticCache {
    pub fn batch(&self) -> usize {
        self.inputs[0].rows()
    }
}

impl MlpParams {
    /// Uniform `±1/sqrt(fan_in)` weights and biases.
    pub fn init(input: usize, hidden: &[usize], rng: &mut Rng) -> Self {
        let mut sizes = vec![input];
        sizes.extend(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|s| {
                let bound = 1.0 / (s[0] as f64).sqrt();
                let mut w = Matrix::zeros(s[1], s[0]);
                w.data_mut().iter_mut().for_each(|x| *x = rng.uniform_range(-bound, bound));
                let mut b = Matrix::zeros(s[1], 1);
                b.data_mut().iter_mut().for_each(|x| *x = rng.uniform_range(-bound, bound));
                DenseLayer { w, b }
            })
            .collect();
        MlpParams { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let mut fan_in = match self.layers.first() {
            Some(l) => l.w.cols(),
            None => return Err(Error::validation("critic", "no layers")),
        };
        for (k, l) in self.layers.iter().enumerate() {
            if l.w.cols() != fan_in || l.b.shape() != (l.w.rows(), 1) {
                return Err(Error::shape("critic", format!("layer {k} inconsistent with its input")));
            }
            fan_in = l.w.rows();
        }
        if fan_in != 1 {
            return Err(Error::shape("critic", format!("output width {fan_in}, expected 1")));
        }
        Ok(())
    }

    /// Batched forward over `states` (`batch x obs_dim`) and `actions`
    /// (`batch x action_dim`). Returns one Q-value per row.
    pub fn forward_batch(&self, states: &Matrix, actions: &Matrix) -> Result<(Vec<f64>, CriticCache)> {
        let batch = states.rows();
        if actions.rows() != batch || states.cols() + actions.cols() != self.input_dim() {
            return Err(Error::shape(
                "critic_forward",
                format!(
                    "states {:?}, actions {:?}, critic input {}",
                    states.shape(),
                    actions.shape(),
                    self.input_dim()
                ),
            ));
        }
        let mut x = Matrix::zeros(batch, self.input_dim());
        for r in 0..batch {
            let row = x.row_mut(r);
            row[..states.cols()].copy_from_slice(states.row(r));
            row[states.cols()..].copy_from_slice(actions.row(r));
        }
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = Matrix::zeros(batch, layer.w.rows());
            gemm(1.0, &x, Transpose::No, &layer.w, Transpose::Yes, 0.0, &mut z)?;
            for r in 0..batch {
                for (zi, bi) in z.row_mut(r).iter_mut().zip(layer.b.data()) {
                    *zi += bi;
                }
            }
            let next = if k == last { z.clone() } else { z.map(|v| v.max(0.0)) };
            inputs.push(std::mem::replace(&mut x, next));
            pre.push(z);
        }
        Ok((x.into_vec(), CriticCache { inputs, pre }))
    }

    pub fn forward(&self, state: &[f64], action: &[f64]) -> Result<(f64, CriticCache)> {
        let (q, cache) = self.forward_batch(&Matrix::row_vector(state), &Matrix::row_vector(action))?;
        Ok((q[0], cache))
    }

    /// Backward from per-row `dL/dq`. Returns parameter gradients (summed
    /// over the batch, in [`ParamSet`] order; empty unless `with_params`) and
    /// `dL/dinput`.
    fn backward(&self, cache: &CriticCache, dl_dq: &[f64], with_params: bool) -> Result<(Vec<Matrix>, Matrix)> {
        let batch = cache.batch();
        if dl_dq.len() != batch || cache.inputs.len() != self.layers.len() {
            return Err(Error::contract(format!(
                "critic backward: {} upstream values for batch {batch}, cache of {} layers for {}",
                dl_dq.len(),
                cache.inputs.len(),
                self.layers.len()
            )));
        }
        for (k, (inp, l)) in cache.inputs.iter().zip(&self.layers).enumerate() {
            if inp.shape() != (batch, l.w.cols()) {
                return Err(Error::contract(format!("critic backward: cache layer {k} has wrong shape")));
            }
        }
        let mut grads = if with_params {
            vec![Matrix::zeros(0, 0); 2 * self.layers.len()]
        } else {
            Vec::new()
        };
        let mut delta = Matrix::from_vec(batch, 1, dl_dq.to_vec())?;
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            if k + 1 < self.layers.len() {
                // ReLU derivative at this layer's pre-activation.
                for (d, z) in delta.data_mut().iter_mut().zip(cache.pre[k].data()) {
                    *d = if *z > 0.0 { *d } else { 0.0 };
                }
            }
            if with_params {
                let mut gw = Matrix::zeros(layer.w.rows(), layer.w.cols());
                gemm(1.0, &delta, Transpose::Yes, &cache.inputs[k], Transpose::No, 0.0, &mut gw)?;
                grads[2 * k] = gw;
                grads[2 * k + 1] = delta.column_sums();
            }

            let mut d_in = Matrix::zeros(batch, layer.w.cols());
            gemm(1.0, &delta, Transpose::No, &layer.w, Transpose::No, 0.0, &mut d_in)?;
            delta = d_in;
        }
        Ok((grads, delta))
    }

    /// Gradients of `sum_b dl_dq[b] * q[b]` with respect to every parameter.
    pub fn backward_params(&self, cache: &CriticCache, dl_dq: &[f64]) -> Result<Vec<Matrix>> {
        Ok(self.backward(cache, dl_dq, true)?.0)
    }

    /// `dQ/da` for each row of the cached batch, `batch x action_dim`.
    pub fn action_grad_batch(&self, cache: &CriticCache, action_dim: usize) -> Result<Matrix> {
        let batch = cache.batch();
        let (_, d_in) = self.backward(cache, &vec![1.0; batch], false)?;
        let obs_dim = self.input_dim() - action_dim;
        let mut out = Matrix::zeros(batch, action_dim);
        for r in 0..batch {
            out.row_mut(r).copy_from_slice(&d_in.row(r)[obs_dim..]);
        }
        Ok(out)
    }

    pub fn action_grad(&self, state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
        let (_, cache) = self.forward(state, action)?;
        Ok(self.action_grad_batch(&cache, action.len())?.into_vec())
    }
}

pub fn critic_forward(net: &MlpParams, state: &[f64], action: &[f64]) -> Result<(f64, CriticCache)> {
    net.forward(state, action)
}

pub fn critic_backward_params(net: &MlpParams, cache: &CriticCache, dl_dq: f64) -> Result<Vec<Matrix>> {
    net.backward_params(cache, &[dl_dq])
}

pub fn critic_action_grad(net: &MlpParams, state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
    net.action_grad(state, action)
}

impl ParamSet for MlpParams {
    fn named_params(&self) -> Vec<(String, &Matrix)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(k, l)| [(format!("layer{k}.w"), &l.w), (format!("layer{k}.b"), &l.b)])
            .collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.w, &mut l.b])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticPair {
    pub q1: MlpParams,
    pub q2: MlpParams,
}

impl CriticPair {
    pub fn init(obs_dim: usize, action_dim: usize, hidden: &[usize], rng: &mut Rng) -> Self {
        CriticPair {
            q1: MlpParams::init(obs_dim + action_dim, hidden, rng),
            q2: MlpParams::init(obs_dim + action_dim, hidden, rng),
        }
    }
}

impl ParamSet for CriticPair {
    fn named_params(&self) -> Vec<(String, &Matrix)> {
        let mut out: Vec<_> = self
            .q1
            .named_params()
            .into_iter()
            .map(|(n, m)| (format!("q1.{n}"), m))
            .collect();
        out.extend(self.q2.named_params().into_iter().map(|(n, m)| (format!("q2.{n}"), m)));
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = self.q1.params_mut();
        out.extend(self.q2.params_mut());
        out
    }
}
