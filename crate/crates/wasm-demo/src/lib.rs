//! Browser bindings for three interactive views: a frame error rate sweep,
//! the masking-rate search with its distance histograms, and the security
//! calculator. Each binding returns JSON for the page script.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use keybind::decoder::{ChannelConfig, DecoderParams, Variant};
use keybind::ldpc::LdpcCode;
use keybind::metrics::SecurityReport;
use keybind::pipeline::{fit_quantizer, inter_class_pairs, search_kappa, FeatureVector, Pipeline, PipelineConfig};
use keybind::simulation::{monte_carlo_fer, synth_embeddings};
use keybind::Result;

const PERM_SEED: u64 = 3;
const MASK_SEED: u64 = 2;
const MAX_PAIRS: usize = 5000;

#[derive(Serialize)]
struct FerCurve {
    decoder: String,
    p: Vec<f64>,
    fer: Vec<f64>,
    frames: u64,
}

/// Frame error rates of one decoder at each crossover rate in `ps`.
pub fn fer_sweep_json(decoder: &str, iters: usize, ps: &[f64], frames: u64, seed: u64) -> Result<String> {
    let params = match decoder.parse::<Variant>()? {
        Variant::SumProduct => DecoderParams::sum_product(iters),
        Variant::NormalizedMinSum => DecoderParams::normalized(iters, 0.8)?,
        Variant::OffsetMinSum => DecoderParams::offset(iters, 0.15)?,
        _ => DecoderParams::min_sum(iters),
    };
    let report = monte_carlo_fer(&LdpcCode::bg2(), &params, ps, frames, seed, ChannelConfig::default())?;
    Ok(serde_json::to_string(&FerCurve {
        decoder: report.decoder,
        p: report.points.iter().map(|x| x.p).collect(),
        fer: report.points.iter().map(|x| x.fer()).collect(),
        frames,
    })?)
}

#[derive(Serialize)]
struct MaskView {
    kappa: f64,
    achieved: f64,
    tau: f64,
    /// Left edges of the histogram bins, as fractions of template length.
    edges: Vec<f64>,
    non_mated_plain: Vec<u32>,
    non_mated_masked: Vec<u32>,
    mated_masked: Vec<u32>,
}

fn histogram(values: &[f64], bins: usize, hi: f64) -> Vec<u32> {
    let mut h = vec![0; bins];
    for &v in values {
        h[((v / hi * bins as f64) as usize).min(bins - 1)] += 1;
    }
    h
}

/// Calibrates on synthetic embeddings and histograms template distances
/// before and after masking.
pub fn mask_view_json(subjects: usize, noise: f64, q: usize, tau: f64, quantile: f64, seed: u64) -> Result<String> {
    const BINS: usize = 60;
    const HI: f64 = 0.6;
    let data = synth_embeddings(subjects, 2, noise, seed);
    let feats: Vec<FeatureVector> = data.iter().map(|(_, v)| v.clone()).collect();
    let labels: Vec<String> = data.iter().map(|(s, _)| s.clone()).collect();
    let table = fit_quantizer(&feats, q)?;
    let plain = Pipeline::new(PipelineConfig::new(q, PERM_SEED, MASK_SEED, 0.0, tau, quantile)?, table.clone())?;
    let permuted = feats.iter().map(|v| plain.permuted(v)).collect::<Result<Vec<_>>>()?;
    let pairs = inter_class_pairs(&labels, MAX_PAIRS, seed);
    let tpairs: Vec<_> = pairs.iter().map(|&(a, b)| (permuted[a].clone(), permuted[b].clone())).collect();
    let found = search_kappa(&tpairs, tau, quantile, MASK_SEED)?;
    let masked_pipe = Pipeline::new(PipelineConfig::new(q, PERM_SEED, MASK_SEED, found.kappa, tau, quantile)?, table)?;
    let masked = feats.iter().map(|v| masked_pipe.transform(v)).collect::<Result<Vec<_>>>()?;

    let len = permuted[0].len() as f64;
    let dist = |a: &keybind::pipeline::BinaryTemplate, b: &keybind::pipeline::BinaryTemplate| -> Result<f64> {
        Ok(a.bits.hamming(&b.bits)? as f64 / len)
    };
    let nm_plain = pairs.iter().map(|&(a, b)| dist(&permuted[a], &permuted[b])).collect::<Result<Vec<_>>>()?;
    let nm_masked = pairs.iter().map(|&(a, b)| dist(&masked[a], &masked[b])).collect::<Result<Vec<_>>>()?;
    // samples come in subject order, two per subject
    let mated = (0..subjects).map(|s| dist(&masked[2 * s], &masked[2 * s + 1])).collect::<Result<Vec<_>>>()?;
    Ok(serde_json::to_string(&MaskView {
        kappa: found.kappa,
        achieved: found.achieved,
        tau,
        edges: (0..BINS).map(|i| HI * i as f64 / BINS as f64).collect(),
        non_mated_plain: histogram(&nm_plain, BINS, HI),
        non_mated_masked: histogram(&nm_masked, BINS, HI),
        mated_masked: histogram(&mated, BINS, HI),
    })?)
}

/// Security report for entropy `h`, tolerating `round(t_frac * h)` errors.
pub fn security_json(h: f64, t_frac: f64, m: usize) -> Result<String> {
    let t = (t_frac * h).round() as usize;
    Ok(serde_json::to_string(&SecurityReport::new(h, t, m)?)?)
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn fer_sweep(decoder: &str, iters: usize, ps: Vec<f64>, frames: u32, seed: u32) -> std::result::Result<String, JsError> {
    js(fer_sweep_json(decoder, iters, &ps, frames as u64, seed as u64))
}

#[wasm_bindgen]
pub fn mask_view(subjects: usize, noise: f64, q: usize, tau: f64, quantile: f64, seed: u32) -> std::result::Result<String, JsError> {
    js(mask_view_json(subjects, noise, q, tau, quantile, seed as u64))
}

#[wasm_bindgen]
pub fn security(h: f64, t_frac: f64, m: usize) -> std::result::Result<String, JsError> {
    js(security_json(h, t_frac, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fer_sweep_shape() {
        let v: serde_json::Value = serde_json::from_str(&fer_sweep_json("ms", 20, &[0.0, 0.2], 20, 1).unwrap()).unwrap();
        assert_eq!(v["fer"][0], 0.0);
        assert_eq!(v["p"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn mask_view_counts_every_pair() {
        let v: serde_json::Value = serde_json::from_str(&mask_view_json(40, 0.4, 4, 0.235, 0.95, 2).unwrap()).unwrap();
        let total: u64 = v["non_mated_masked"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).sum();
        assert_eq!(total, 40 * 2 * (40 * 2 - 1) / 2 - 40);
        let mated: u64 = v["mated_masked"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).sum();
        assert_eq!(mated, 40);
    }

    #[test]
    fn security_caps_at_key_length() {
        let v: serde_json::Value = serde_json::from_str(&security_json(2000.0, 0.1761, 3).unwrap()).unwrap();
        assert_eq!(v["h_sys"], 300.0);
        assert!(security_json(100.0, 0.9, 3).is_err());
    }
}
