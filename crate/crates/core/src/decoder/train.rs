use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::ldpc::LdpcCode;
use crate::prng::SplitMix64;
use crate::simulation::flip_with;

use super::channel::{init_llr, ChannelConfig, DEFAULT_DECODE_P};
use super::neural::{backward_from, unroll_last};
use super::params::{DecoderParams, ParamMode};

/// Greedy layer-wise training setup for the neural min-sum decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Number of decoder iterations (layers) to fit.
    pub iterations: usize,
    /// Training crossover rates are drawn uniformly from `[p_min, p_max]`.
    pub p_min: f64,
    pub p_max: f64,
    /// Channel parameter used to turn received bits into LLRs.
    pub llr_p: f64,
    pub frames_per_epoch: usize,
    pub batch_size: usize,
    pub epochs_per_layer: usize,
    pub step_size: f64,
    pub momentum: f64,
    pub seed: u64,
    pub mode: ParamMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 100,
            p_min: 0.14,
            p_max: 0.19,
            llr_p: DEFAULT_DECODE_P,
            frames_per_epoch: 256,
            batch_size: 64,
            epochs_per_layer: 2,
            step_size: 0.1,
            momentum: 0.9,
            seed: 1,
            mode: ParamMode::Shared,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let in_range = |p: f64| p > 0.0 && p < 0.5;
        if !(in_range(self.p_min) && in_range(self.p_max) && self.p_min <= self.p_max) {
            return Err(Error::Argument(format!(
                "training crossover range [{}, {}] must lie inside (0, 0.5)",
                self.p_min, self.p_max
            )));
        }
        ChannelConfig::new(self.llr_p)?;
        if self.frames_per_epoch == 0 || self.batch_size == 0 {
            return Err(Error::Argument("frame and batch counts must be positive".into()));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::Argument("step size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Argument("momentum must lie in [0, 1)".into()));
        }
        if self.frames_per_epoch >= 1 << 21 || self.epochs_per_layer >= 1 << 21 {
            return Err(Error::Argument("frame or epoch count too large".into()));
        }
        Ok(())
    }
}

const ALPHA_FLOOR: f64 = 1e-3;

/// Per-layer progress reported to the caller.
#[derive(Debug, Clone, Copy)]
pub struct LayerReport {
    pub layer: usize,
    pub epoch: usize,
    pub loss: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Fits a neural min-sum decoder one iteration at a time. Layer `l` starts
/// at (alpha = 1, beta = 0), is trained on the loss of the `l`-iteration
/// decoder's output, and is then frozen.
pub fn train_greedy(code: &LdpcCode, cfg: &TrainConfig) -> Result<DecoderParams> {
    train_greedy_with(code, cfg, |_| {})
}

pub fn train_greedy_with(
    code: &LdpcCode,
    cfg: &TrainConfig,
    mut report: impl FnMut(LayerReport),
) -> Result<DecoderParams> {
    cfg.validate()?;
    let graph = code.graph();
    let edges = graph.edge_count();
    let llr_ch = ChannelConfig::new(cfg.llr_p)?;
    let mut params = DecoderParams::neural_identity(0, cfg.mode, edges);

    for layer in 0..cfg.iterations {
        params.push_identity_layer(edges);
        let per = match cfg.mode {
            ParamMode::Shared => 1,
            ParamMode::PerEdge => edges,
        };
        let base = layer * per;
        let mut vel_a = vec![0.0; per];
        let mut vel_b = vec![0.0; per];

        for epoch in 0..cfg.epochs_per_layer {
            let mut epoch_loss = 0.0;
            let mut start = 0;
            while start < cfg.frames_per_epoch {
                let end = (start + cfg.batch_size).min(cfg.frames_per_epoch);
                let grads: Vec<_> = (start..end)
                    .into_par_iter()
                    .map(|f| {
                        let stream = ((layer as u64) << 42) ^ ((epoch as u64) << 21) ^ f as u64;
                        let mut rng = SplitMix64::stream(cfg.seed, stream);
                        let msg = BitVector::from_bools((0..code.k()).map(|_| rng.next_bool()));
                        let cw = code.encode(&msg)?;
                        let p = cfg.p_min + (cfg.p_max - cfg.p_min) * rng.next_f64();
                        let rx = flip_with(&cw, p, &mut rng);
                        let llr = init_llr(&rx, llr_ch);
                        let trace = unroll_last(graph, &llr, &params, layer + 1);
                        backward_from(graph, &trace, &params, &cw, layer, 1.0)
                    })
                    .collect::<Result<_>>()?;
                let count = grads.len() as f64;
                let mut ga = vec![0.0; per];
                let mut gb = vec![0.0; per];
                for g in &grads {
                    epoch_loss += g.loss;
                    for j in 0..per {
                        ga[j] += g.alpha[base + j] / count;
                        gb[j] += g.beta[base + j] / count;
                    }
                }
                let alpha = params.alpha_mut();
                for j in 0..per {
                    vel_a[j] = cfg.momentum * vel_a[j] - cfg.step_size * ga[j];
                    alpha[base + j] = (alpha[base + j] + vel_a[j]).max(ALPHA_FLOOR);
                }
                let beta = params.beta_mut();
                for j in 0..per {
                    vel_b[j] = cfg.momentum * vel_b[j] - cfg.step_size * gb[j];
                    beta[base + j] = (beta[base + j] + vel_b[j]).max(0.0);
                }
                start = end;
            }
            let loss = epoch_loss / cfg.frames_per_epoch as f64;
            let new_params = params.alpha()[base..base + per]
                .iter()
                .chain(&params.beta()[base..base + per]);
            if !loss.is_finite() || new_params.clone().any(|x| !x.is_finite()) {
                return Err(Error::Divergence { layer: layer + 1, loss });
            }
            report(LayerReport {
                layer: layer + 1,
                epoch,
                loss,
                alpha: params.alpha()[base],
                beta: params.beta()[base],
            });
        }
    }
    Ok(params)
}
