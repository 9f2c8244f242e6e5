//! Unrolled neural min-sum: forward trace, loss and reverse-mode gradients.
//!
//! Each decoding iteration is one layer made of two sublayers (variable then
//! check). Gradient conventions at non-smooth points:
//! * `max(alpha * min - beta, 0)` takes the zero branch when the argument is
//!   exactly zero;
//! * `min` routes its gradient to the argmin edge, ties going to the lowest
//!   edge id;
//! * signs are treated as constants.

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::ldpc::TannerGraph;

use super::channel::LlrVector;
use super::engine::{check_inputs, hard_decision, iterate, MessageState};
use super::params::{DecoderParams, Variant};

/// Every intermediate value of one unrolled iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    pub v2c: Vec<f64>,
    pub c2v: Vec<f64>,
    pub s: Vec<f64>,
    /// Extrinsic minimum magnitude seen by each output edge.
    pub min: Vec<f64>,
    /// Edge id achieving that minimum.
    pub argmin: Vec<u32>,
    /// Product of extrinsic signs for each output edge.
    pub sign: Vec<f64>,
}

impl LayerTrace {
    fn new(edges: usize, n: usize) -> Self {
        LayerTrace {
            v2c: vec![0.0; edges],
            c2v: vec![0.0; edges],
            s: vec![0.0; n],
            min: vec![0.0; edges],
            argmin: vec![0; edges],
            sign: vec![0.0; edges],
        }
    }

    pub fn hard_decision(&self) -> BitVector {
        hard_decision(&self.s)
    }
}

/// Layer values are in working units: channel LLRs divided by `scale`, the
/// largest channel magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub llr: Vec<f64>,
    pub scale: f64,
    /// Iteration index of `layers[0]`; non-zero when only a tail was recorded.
    pub offset: usize,
    pub layers: Vec<LayerTrace>,
}

impl ForwardTrace {
    /// Two sublayers (variable and check) per unrolled iteration.
    pub fn sublayer_count(&self) -> usize {
        2 * self.layers.len()
    }

    /// Aggregates after the last recorded layer, in LLR units.
    pub fn final_s(&self) -> Vec<f64> {
        match self.layers.last() {
            Some(l) => l.s.iter().map(|x| x * self.scale).collect(),
            None => self.llr.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Runs `iters` neural min-sum iterations without early exit, recording
/// every message.
pub fn unroll_forward(
    graph: &TannerGraph,
    llr: &LlrVector,
    params: &DecoderParams,
    iters: usize,
) -> Result<ForwardTrace> {
    if params.variant() != Variant::NeuralMinSum {
        return Err(Error::Argument(format!(
            "unrolling needs the neural-ms variant, got {}",
            params.variant().id()
        )));
    }
    if iters > params.iterations() {
        return Err(Error::Argument(format!(
            "{iters} iterations requested, parameters cover {}",
            params.iterations()
        )));
    }
    check_inputs(graph, llr, params)?;
    let mut st = MessageState::new(graph, llr, params.variant());
    let mut layers = Vec::with_capacity(iters);
    for i in 0..iters {
        let mut t = LayerTrace::new(graph.edge_count(), graph.n());
        iterate(graph, params, i, &mut st, Some(&mut t));
        layers.push(t);
    }
    Ok(ForwardTrace {
        llr: llr.0.clone(),
        scale: st.scale,
        offset: 0,
        layers,
    })
}

/// Runs `iters` iterations but records only the last one.
pub(crate) fn unroll_last(
    graph: &TannerGraph,
    llr: &LlrVector,
    params: &DecoderParams,
    iters: usize,
) -> ForwardTrace {
    let mut st = MessageState::new(graph, llr, params.variant());
    for i in 0..iters.saturating_sub(1) {
        iterate(graph, params, i, &mut st, None);
    }
    let mut layers = Vec::new();
    if iters > 0 {
        let mut t = LayerTrace::new(graph.edge_count(), graph.n());
        iterate(graph, params, iters - 1, &mut st, Some(&mut t));
        layers.push(t);
    }
    ForwardTrace {
        llr: llr.0.clone(),
        scale: st.scale,
        offset: iters.saturating_sub(1),
        layers,
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy of `P(bit = 1) = sigmoid(-s)` against `target`.
pub fn loss_bce(s: &[f64], target: &BitVector) -> Result<f64> {
    if s.len() != target.len() {
        return Err(Error::Argument(format!(
            "{} aggregates vs {} target bits",
            s.len(),
            target.len()
        )));
    }
    if s.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = s
        .iter()
        .zip(target.iter())
        .map(|(&x, t)| if t { softplus(x) } else { softplus(-x) })
        .sum();
    Ok(total / s.len() as f64)
}

/// Gradients of the final-layer loss with respect to every layer's
/// (alpha, beta).
pub fn backward(
    graph: &TannerGraph,
    trace: &ForwardTrace,
    params: &DecoderParams,
    target: &BitVector,
) -> Result<Gradients> {
    backward_from(graph, trace, params, target, 0, 1.0)
}

/// Reverse pass that stops after layer `first_layer` (0-based). Gradients of
/// earlier layers are left at zero, as are all gradients when `first_layer`
/// precedes the recorded part of the trace. `weight` scales the loss.
pub(crate) fn backward_from(
    graph: &TannerGraph,
    trace: &ForwardTrace,
    params: &DecoderParams,
    target: &BitVector,
    first_layer: usize,
    weight: f64,
) -> Result<Gradients> {
    let n = graph.n();
    let edges = graph.edge_count();
    let s = trace.final_s();
    let loss = weight * loss_bce(&s, target)?;
    let mut ga = vec![0.0; params.alpha().len()];
    let mut gb = vec![0.0; params.beta().len()];
    let layers = trace.offset + trace.layers.len();
    if trace.layers.is_empty() || first_layer >= layers || first_layer < trace.offset {
        return Ok(Gradients {
            loss,
            alpha: ga,
            beta: gb,
        });
    }

    // dL/ds_v = (t_v - sigmoid(-s_v)) / n, taken with respect to the
    // working-unit aggregate (s_v = scale * working s_v); below, the working
    // offset is beta / scale.
    let unit = trace.scale;
    let scale = weight * unit / n as f64;
    let mut g_c2v = vec![0.0; edges];
    for v in 0..n {
        let t = if target.get(v) { 1.0 } else { 0.0 };
        let gs = scale * (t - sigmoid(-s[v]));
        for &e in graph.var_edges(v) {
            g_c2v[e as usize] = gs;
        }
    }

    let mut g_v2c = vec![0.0; edges];
    for i in (first_layer..layers).rev() {
        let layer = &trace.layers[i - trace.offset];
        let propagate = i > first_layer;
        g_v2c.iter_mut().for_each(|x| *x = 0.0);
        for e in 0..edges {
            let g = g_c2v[e];
            if g == 0.0 {
                continue;
            }
            let k = params.index(i, e, edges);
            let (alpha, beta) = (params.alpha()[k], params.beta()[k] / unit);
            let m = layer.min[e];
            if alpha * m - beta > 0.0 {
                let sg = layer.sign[e];
                ga[k] += g * sg * m;
                gb[k] -= g * sg / unit;
                if propagate {
                    let a = layer.argmin[e] as usize;
                    let dir = if layer.v2c[a] < 0.0 { -1.0 } else { 1.0 };
                    g_v2c[a] += g * sg * alpha * dir;
                }
            }
        }
        if !propagate {
            break;
        }
        // v2c_i[e] = llr_v + sum_{e' in E(v)} c2v_{i-1}[e'] - c2v_{i-1}[e]
        for v in 0..n {
            let list = graph.var_edges(v);
            let total: f64 = list.iter().map(|&e| g_v2c[e as usize]).sum();
            for &e in list {
                g_c2v[e as usize] = total - g_v2c[e as usize];
            }
        }
    }
    Ok(Gradients {
        loss,
        alpha: ga,
        beta: gb,
    })
}
