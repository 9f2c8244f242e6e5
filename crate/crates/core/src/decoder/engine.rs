use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::ldpc::TannerGraph;

use super::channel::LlrVector;
use super::neural::LayerTrace;
use super::params::{DecoderParams, ParamMode, Variant};

/// Magnitudes are clamped here before `tanh` so the leave-one-out product
/// never reaches exactly +-1.
const SP_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, Copy)]
pub struct DecodeOptions {
    /// Stop at the first iteration whose hard decision satisfies every check.
    pub early_exit: bool,
    /// Keep the hard decision after every iteration.
    pub record_snapshots: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions {
            early_exit: true,
            record_snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub bits: BitVector,
    pub iterations_used: usize,
    /// True only if `bits` has zero syndrome.
    pub converged: bool,
    pub per_iteration_bits: Option<Vec<BitVector>>,
}

/// Check-to-variable message from the extrinsic inputs `incoming`
/// (the messages on every other edge of the check).
pub fn cn_update(variant: Variant, incoming: &[f64], alpha: f64, beta: f64) -> f64 {
    assert!(!incoming.is_empty(), "check node update needs at least one input");
    if variant == Variant::SumProduct {
        let prod: f64 = incoming
            .iter()
            .map(|x| (x.clamp(-SP_CLAMP, SP_CLAMP) / 2.0).tanh())
            .product();
        return 2.0 * prod.atanh();
    }
    let negative = incoming.iter().filter(|&&x| x < 0.0).count() % 2 == 1;
    let min = incoming.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    let mag = min_sum_magnitude(variant, min, alpha, beta);
    if negative {
        -mag
    } else {
        mag
    }
}

#[inline]
fn min_sum_magnitude(variant: Variant, min: f64, alpha: f64, beta: f64) -> f64 {
    match variant {
        Variant::MinSum => min,
        Variant::NormalizedMinSum => alpha * min,
        Variant::OffsetMinSum => (min - beta).max(0.0),
        Variant::NeuralMinSum => (alpha * min - beta).max(0.0),
        Variant::SumProduct => unreachable!(),
    }
}

/// Variable-to-check message: channel LLR plus the extrinsic check messages.
pub fn vn_update(llr: f64, incoming: &[f64]) -> f64 {
    llr + incoming.iter().sum::<f64>()
}

/// Min-sum variants run on LLRs divided by their largest magnitude (offsets
/// scaled alike), which leaves every decision unchanged in exact arithmetic.
/// Hard-decision channel inputs then become +-1 and plain min-sum messages
/// stay exactly representable integers. On unscaled inputs, sums that are
/// zero in exact arithmetic leave rounding residues whose signs the min rule
/// propagates and amplifies from one iteration to the next. Sum-product is
/// not scale invariant and runs unscaled.
pub(crate) fn working_scale(variant: Variant, llr: &[f64]) -> f64 {
    let max = llr.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if variant == Variant::SumProduct || max == 0.0 {
        1.0
    } else {
        max
    }
}

/// Message buffers of one decoding run, in working units (see
/// [`working_scale`]).
pub(crate) struct MessageState {
    pub llr: Vec<f64>,
    pub scale: f64,
    pub v2c: Vec<f64>,
    pub c2v: Vec<f64>,
    pub s: Vec<f64>,
}

impl MessageState {
    pub fn new(graph: &TannerGraph, llr: &LlrVector, variant: Variant) -> Self {
        let scale = working_scale(variant, &llr.0);
        let llr: Vec<f64> = llr.0.iter().map(|x| x / scale).collect();
        MessageState {
            v2c: vec![0.0; graph.edge_count()],
            c2v: vec![0.0; graph.edge_count()],
            s: llr.clone(),
            llr,
            scale,
        }
    }
}

pub(crate) fn check_inputs(graph: &TannerGraph, llr: &LlrVector, params: &DecoderParams) -> Result<()> {
    if llr.len() != graph.n() {
        return Err(Error::Argument(format!(
            "{} LLRs for a code of length {}",
            llr.len(),
            graph.n()
        )));
    }
    if let Some(e) = params.edges() {
        if e != graph.edge_count() {
            return Err(Error::Argument(format!(
                "per-edge parameters fitted for {e} edges, graph has {}",
                graph.edge_count()
            )));
        }
    }
    if llr.0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("non-finite channel LLR".into()));
    }
    Ok(())
}

/// One flooding iteration (`iteration` is 0-based): variable update, check
/// update, then the per-variable aggregate `s`.
pub(crate) fn iterate(
    graph: &TannerGraph,
    params: &DecoderParams,
    iteration: usize,
    st: &mut MessageState,
    mut trace: Option<&mut LayerTrace>,
) {
    let edges = graph.edge_count();
    let llr = &st.llr;
    for v in 0..graph.n() {
        let list = graph.var_edges(v);
        let total: f64 = llr[v] + list.iter().map(|&e| st.c2v[e as usize]).sum::<f64>();
        for &e in list {
            st.v2c[e as usize] = total - st.c2v[e as usize];
        }
    }

    let variant = params.variant();
    for c in 0..graph.checks() {
        let range = graph.check_edges(c);
        if range.len() < 2 {
            for e in range {
                st.c2v[e] = 0.0;
            }
            continue;
        }
        if variant == Variant::SumProduct {
            sp_check(&st.v2c[range.clone()], &mut st.c2v[range]);
            continue;
        }
        let (mut min1, mut min2) = (f64::INFINITY, f64::INFINITY);
        let (mut i1, mut i2) = (usize::MAX, usize::MAX);
        let mut negative = false;
        for e in range.clone() {
            let x = st.v2c[e];
            let a = x.abs();
            if a < min1 {
                min2 = min1;
                i2 = i1;
                min1 = a;
                i1 = e;
            } else if a < min2 {
                min2 = a;
                i2 = e;
            }
            negative ^= x < 0.0;
        }
        for e in range {
            let (m, arg) = if e == i1 { (min2, i2) } else { (min1, i1) };
            let sign = if negative ^ (st.v2c[e] < 0.0) { -1.0 } else { 1.0 };
            let (alpha, beta) = if params.alpha().is_empty() {
                (1.0, 0.0)
            } else {
                let k = params.index(iteration, e, edges);
                (params.alpha()[k], params.beta()[k] / st.scale)
            };
            st.c2v[e] = sign * min_sum_magnitude(variant, m, alpha, beta);
            if let Some(t) = trace.as_deref_mut() {
                t.min[e] = m;
                t.argmin[e] = arg as u32;
                t.sign[e] = sign;
            }
        }
    }

    for v in 0..graph.n() {
        st.s[v] = st.llr[v]
            + graph
                .var_edges(v)
                .iter()
                .map(|&e| st.c2v[e as usize])
                .sum::<f64>();
    }
    if let Some(t) = trace {
        t.v2c.copy_from_slice(&st.v2c);
        t.c2v.copy_from_slice(&st.c2v);
        t.s.copy_from_slice(&st.s);
    }
}

fn sp_check(input: &[f64], out: &mut [f64]) {
    let t: Vec<f64> = input
        .iter()
        .map(|x| (x.clamp(-SP_CLAMP, SP_CLAMP) / 2.0).tanh())
        .collect();
    // leave-one-out products from prefix and suffix scans
    let d = t.len();
    let mut prefix = 1.0;
    for i in 0..d {
        out[i] = prefix;
        prefix *= t[i];
    }
    let mut suffix = 1.0;
    for i in (0..d).rev() {
        out[i] = 2.0 * (out[i] * suffix).atanh();
        suffix *= t[i];
    }
}

/// Hard decision from the aggregates: bit 1 iff `s < 0` (zero maps to bit 0).
pub(crate) fn hard_decision(s: &[f64]) -> BitVector {
    BitVector::from_bools(s.iter().map(|&x| x < 0.0))
}

pub(crate) fn satisfies_checks(graph: &TannerGraph, bits: &BitVector) -> bool {
    (0..graph.checks()).all(|c| {
        !graph
            .check_edges(c)
            .fold(false, |acc, e| acc ^ bits.get(graph.edge_var(e)))
    })
}

/// Runs up to `params.iterations()` flooding iterations.
pub fn decode(
    graph: &TannerGraph,
    llr: &LlrVector,
    params: &DecoderParams,
    opts: DecodeOptions,
) -> Result<DecodeResult> {
    check_inputs(graph, llr, params)?;
    if params.mode() == ParamMode::PerEdge && params.edges().is_none() && params.iterations() > 0 {
        return Err(Error::Argument("per-edge parameters without edges".into()));
    }
    let mut st = MessageState::new(graph, llr, params.variant());
    let mut snapshots = opts.record_snapshots.then(Vec::new);
    let mut bits = hard_decision(&st.s);
    let mut converged = satisfies_checks(graph, &bits);
    let mut used = 0;
    if !(opts.early_exit && converged) {
        for i in 0..params.iterations() {
            iterate(graph, params, i, &mut st, None);
            bits = hard_decision(&st.s);
            converged = satisfies_checks(graph, &bits);
            used = i + 1;
            if let Some(s) = snapshots.as_mut() {
                s.push(bits.clone());
            }
            if opts.early_exit && converged {
                break;
            }
        }
    }
    Ok(DecodeResult {
        bits,
        iterations_used: used,
        converged,
        per_iteration_bits: snapshots,
    })
}
