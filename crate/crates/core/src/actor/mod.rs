//! Population-coded spiking actor.
//!
//! States are encoded by Gaussian receptive fields into deterministic spike
//! trains, passed through a stack of LIF layers for `timesteps` steps, and
//! decoded from the firing rate of the last layer's populations into
//! bounded actions. Gradients come from hand-written backpropagation through
//! time with a surrogate derivative at every LIF threshold (see
//! [`actor_backward`]).

mod backward;
mod encoder;
mod lif;

pub use backward::{actor_backward, ActorGrads};
pub use encoder::{encode_intensity, encode_spikes, EncoderParams};
pub use lif::{lif_step, LayerTrace, LifLayerParams, LifState, SpikeMode};

use crate::error::{Error, Result};
use crate::tensor::{Matrix, ParamSet, Rng};

/// Architecture and neuron constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ActorConfig {
    pub obs_dim: usize,
    pub action_dim: usize,
    /// Encoder neurons per input dimension.
    pub encoder_pop: usize,
    /// Output neurons per action dimension.
    pub decoder_pop: usize,
    pub hidden: Vec<usize>,
    pub timesteps: usize,
    pub dc: f64,
    pub dv: f64,
    pub vth: f64,
    pub encoder_epsilon: f64,
    /// Range the receptive-field centres are spread over.
    pub obs_range: (f64, f64),
    pub action_bound: Vec<f64>,
}

impl ActorConfig {
    pub fn new(obs_dim: usize, action_dim: usize, action_bound: f64) -> Self {
        ActorConfig {
            obs_dim,
            action_dim,
            encoder_pop: 10,
            decoder_pop: 10,
            hidden: vec![256, 256],
            timesteps: 5,
            dc: 0.5,
            dv: 0.75,
            vth: 0.5,
            encoder_epsilon: 0.5,
            obs_range: (-1.0, 1.0),
            action_bound: vec![action_bound; action_dim],
        }
    }
}

/// Linear read-out from population firing rates. Row `i` of `wa` is the
/// weight vector of action `i`'s population.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderParams {
    /// `action_dim x decoder_pop`.
    pub wa: Matrix,
    /// `action_dim x 1`.
    pub ba: Matrix,
}

impl DecoderParams {
    pub fn init(action_dim: usize, pop: usize, rng: &mut Rng) -> Self {
        let bound = 1.0 / (pop as f64).sqrt();
        let mut wa = Matrix::zeros(action_dim, pop);
        wa.data_mut()
            .iter_mut()
            .for_each(|x| *x = rng.uniform_range(-bound, bound));
        let mut ba = Matrix::zeros(action_dim, 1);
        ba.data_mut()
            .iter_mut()
            .for_each(|x| *x = rng.uniform_range(-bound, bound));
        DecoderParams { wa, ba }
    }

    pub fn action_dim(&self) -> usize {
        self.wa.rows()
    }

    pub fn pop_size(&self) -> usize {
        self.wa.cols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActorParams {
    pub encoder: EncoderParams,
    pub layers: Vec<LifLayerParams>,
    pub decoder: DecoderParams,
    pub timesteps: usize,
    /// Per-dimension bound; actions are `bound * tanh(pre_action)`.
    pub action_bound: Vec<f64>,
}

/// Everything the backward pass needs from a batched forward pass.
///
/// Rows of the per-timestep matrices are indexed `t * batch + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace {
    pub batch: usize,
    pub timesteps: usize,
    /// `batch x obs_dim`.
    pub states: Matrix,
    /// Encoder intensities `A`, `batch x encoder_width`.
    pub intensity: Matrix,
    /// Encoder output `o^0_t`, `(timesteps * batch) x encoder_width`.
    pub encoder_spikes: Matrix,
    pub layers: Vec<LayerTrace>,
    /// Output-layer spike counts, `batch x (action_dim * decoder_pop)`.
    pub spike_counts: Matrix,
    /// `spike_counts / timesteps`.
    pub rates: Matrix,
    /// Decoder output before squashing, `batch x action_dim`.
    pub pre_action: Matrix,
    pub action: Matrix,
}

impl ActorParams {
    pub fn init(cfg: &ActorConfig, rng: &mut Rng) -> Result<Self> {
        if cfg.action_bound.len() != cfg.action_dim {
            return Err(Error::validation(
                "action_bound",
                format!("{} bounds for {} actions", cfg.action_bound.len(), cfg.action_dim),
            ));
        }
        let encoder = EncoderParams::evenly_spaced(
            cfg.obs_dim,
            cfg.encoder_pop,
            cfg.obs_range.0,
            cfg.obs_range.1,
            cfg.encoder_epsilon,
        );
        let mut sizes = vec![cfg.obs_dim * cfg.encoder_pop];
        sizes.extend(&cfg.hidden);
        sizes.push(cfg.action_dim * cfg.decoder_pop);
        let layers = sizes
            .windows(2)
            .map(|w| LifLayerParams::init(w[0], w[1], cfg.dc, cfg.dv, cfg.vth, rng))
            .collect();
        let decoder = DecoderParams::init(cfg.action_dim, cfg.decoder_pop, rng);
        let params = ActorParams {
            encoder,
            layers,
            decoder,
            timesteps: cfg.timesteps,
            action_bound: cfg.action_bound.clone(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn obs_dim(&self) -> usize {
        self.encoder.obs_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.decoder.action_dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.encoder.validate()?;
        if self.timesteps == 0 {
            return Err(Error::validation("timesteps", "must be >= 1"));
        }
        if self.layers.is_empty() {
            return Err(Error::validation("layers", "need at least one LIF layer"));
        }
        let mut fan_in = self.encoder.width();
        for (k, layer) in self.layers.iter().enumerate() {
            layer.validate(k)?;
            if layer.fan_in() != fan_in {
                return Err(Error::shape(
                    "actor",
                    format!("layer {k} takes {} inputs, previous stage gives {fan_in}", layer.fan_in()),
                ));
            }
            fan_in = layer.fan_out();
        }
        let out = self.decoder.action_dim() * self.decoder.pop_size();
        if fan_in != out || self.decoder.ba.shape() != (self.decoder.action_dim(), 1) {
            return Err(Error::shape(
                "actor",
                format!("last layer has {fan_in} neurons, decoder reads {out}"),
            ));
        }
        if self.action_bound.len() != self.action_dim() || self.action_bound.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::validation(
                "action_bound",
                format!("need {} positive bounds, got {:?}", self.action_dim(), self.action_bound),
            ));
        }
        Ok(())
    }

    /// Keep receptive-field widths strictly positive after an optimizer step.
    pub fn clamp_sigma(&mut self, min: f64) {
        self.encoder
            .sigma
            .data_mut()
            .iter_mut()
            .for_each(|s| *s = s.max(min));
    }

    /// Forward pass for a batch of states (`batch x obs_dim`).
    pub fn forward_batch(&self, states: &Matrix, mode: SpikeMode) -> Result<ForwardTrace> {
        if states.cols() != self.obs_dim() {
            return Err(Error::shape(
                "actor_forward",
                format!("states have {} columns, actor expects {}", states.cols(), self.obs_dim()),
            ));
        }
        let batch = states.rows();
        let steps = self.timesteps;
        let width = self.encoder.width();

        let mut intensity = Matrix::zeros(batch, width);
        for b in 0..batch {
            encoder::intensity_into(&self.encoder, states.row(b), intensity.row_mut(b));
        }
        let mut encoder_spikes = Matrix::zeros(steps * batch, width);
        match mode {
            SpikeMode::Hard => {
                for b in 0..batch {
                    let train = encode_spikes(&self.encoder, intensity.row(b), steps);
                    for t in 0..steps {
                        encoder_spikes.row_mut(t * batch + b).copy_from_slice(train.row(t));
                    }
                }
            }
            SpikeMode::Smoothed(_) => {
                for t in 0..steps {
                    encoder_spikes
                        .row_block_mut(t * batch, batch)
                        .copy_from_slice(intensity.data());
                }
            }
        }

        let mut layers: Vec<LayerTrace> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let input = layers.last().map_or(&encoder_spikes, |l| &l.o);
            let trace = lif::run_layer(layer, input, batch, steps, mode)?;
            layers.push(trace);
        }

        let out = &layers[layers.len() - 1].o;
        let mut spike_counts = Matrix::zeros(batch, out.cols());
        for t in 0..steps {
            for (acc, x) in spike_counts
                .data_mut()
                .iter_mut()
                .zip(out.row_block(t * batch, batch))
            {
                *acc += x;
            }
        }
        let rates = spike_counts.map(|x| x / steps as f64);

        let na = self.action_dim();
        let ns = self.decoder.pop_size();
        let mut pre_action = Matrix::zeros(batch, na);
        let mut action = Matrix::zeros(batch, na);
        for b in 0..batch {
            let f = rates.row(b);
            for i in 0..na {
                let dot: f64 = self
                    .decoder
                    .wa
                    .row(i)
                    .iter()
                    .zip(&f[i * ns..(i + 1) * ns])
                    .map(|(w, x)| w * x)
                    .sum();
                let pre = dot + self.decoder.ba.get(i, 0);
                pre_action.set(b, i, pre);
                action.set(b, i, self.action_bound[i] * pre.tanh());
            }
        }

        Ok(ForwardTrace {
            batch,
            timesteps: steps,
            states: states.clone(),
            intensity,
            encoder_spikes,
            layers,
            spike_counts,
            rates,
            pre_action,
            action,
        })
    }

    /// Forward pass for a single state with binary spikes.
    pub fn forward(&self, state: &[f64]) -> Result<(Vec<f64>, ForwardTrace)> {
        let trace = self.forward_batch(&Matrix::row_vector(state), SpikeMode::Hard)?;
        Ok((trace.action.row(0).to_vec(), trace))
    }

    /// Greedy action only.
    pub fn act(&self, state: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(state)?.0)
    }
}

/// Free-function form of [`ActorParams::forward`].
pub fn actor_forward(params: &ActorParams, state: &[f64]) -> Result<(Vec<f64>, ForwardTrace)> {
    params.forward(state)
}

impl ParamSet for ActorParams {
    fn named_params(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![
            ("encoder.mu".to_string(), &self.encoder.mu),
            ("encoder.sigma".to_string(), &self.encoder.sigma),
        ];
        for (k, l) in self.layers.iter().enumerate() {
            out.push((format!("layer{k}.w"), &l.w));
            out.push((format!("layer{k}.b"), &l.b));
        }
        out.push(("decoder.wa".to_string(), &self.decoder.wa));
        out.push(("decoder.ba".to_string(), &self.decoder.ba));
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = vec![&mut self.encoder.mu, &mut self.encoder.sigma];
        for l in &mut self.layers {
            out.push(&mut l.w);
            out.push(&mut l.b);
        }
        out.push(&mut self.decoder.wa);
        out.push(&mut self.decoder.ba);
        out
    }
}
