//! Recognition, security and linkability measures.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 100;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Binary entropy in bits; `h2(0) = h2(1) = 0`.
pub fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Mated and non-mated comparison scores with their moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreStats {
    pub mated: Vec<f64>,
    pub non_mated: Vec<f64>,
    pub mu_m: f64,
    pub mu_nm: f64,
    pub sigma_m: f64,
    pub sigma_nm: f64,
}

impl ScoreStats {
    pub fn new(mated: Vec<f64>, non_mated: Vec<f64>) -> Result<Self> {
        if mated.is_empty() || non_mated.is_empty() {
            return Err(Error::Argument("score statistics need mated and non-mated scores".into()));
        }
        Ok(ScoreStats {
            mu_m: mean(&mated),
            mu_nm: mean(&non_mated),
            sigma_m: std_dev(&mated),
            sigma_nm: std_dev(&non_mated),
            mated,
            non_mated,
        })
    }
}

/// d' = |mu_m - mu_nm| / sqrt((sigma_m^2 + sigma_nm^2) / 2).
pub fn decidability(stats: &ScoreStats) -> Result<f64> {
    decidability_from_moments(stats.mu_m, stats.mu_nm, stats.sigma_m, stats.sigma_nm)
}

pub fn decidability_from_moments(mu_m: f64, mu_nm: f64, sigma_m: f64, sigma_nm: f64) -> Result<f64> {
    let pooled = 0.5 * (sigma_m * sigma_m + sigma_nm * sigma_nm);
    if !(pooled > 0.0) {
        return Err(Error::Undefined("decidability needs a positive pooled variance".into()));
    }
    Ok((mu_m - mu_nm).abs() / pooled.sqrt())
}

/// Degrees of freedom E(1 - E) / V^2 of a non-mated distance distribution
/// with mean `e_hd` and standard deviation `v_hd`.
pub fn dof(e_hd: f64, v_hd: f64) -> Result<f64> {
    if !(e_hd > 0.0 && e_hd < 1.0) || !(v_hd > 0.0) || !v_hd.is_finite() {
        return Err(Error::Argument(format!("need 0 < E_HD < 1 and V_HD > 0, got {e_hd} and {v_hd}")));
    }
    Ok(e_hd * (1.0 - e_hd) / (v_hd * v_hd))
}

/// Entropy in bits of `dof` i.i.d. bits that differ at rate `e_hd`.
pub fn entropy_iid(dof: f64, e_hd: f64) -> Result<f64> {
    if !(dof >= 0.0) || !(e_hd > 0.0 && e_hd < 1.0) {
        return Err(Error::Argument(format!("need DOF >= 0 and 0 < E_HD < 1, got {dof} and {e_hd}")));
    }
    Ok(dof * h2(e_hd))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub e_hd: f64,
    pub v_hd: f64,
    pub dof: f64,
    pub h: f64,
}

impl EntropyReport {
    /// From non-mated fractional distances.
    pub fn from_scores(non_mated: &[f64]) -> Result<Self> {
        if non_mated.is_empty() {
            return Err(Error::Argument("no non-mated scores".into()));
        }
        let e_hd = mean(non_mated);
        let v_hd = std_dev(non_mated);
        let dof = dof(e_hd, v_hd)?;
        Ok(EntropyReport {
            e_hd,
            v_hd,
            dof,
            h: entropy_iid(dof, e_hd)?,
        })
    }
}

/// log2(2^H / sum_{i <= t} C(H, i)). The binomials use H rounded to the
/// nearest integer.
pub fn sphere_packing_strength(h: f64, t: usize) -> Result<f64> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::Argument(format!("H = {h} must be finite and non-negative")));
    }
    let n = h.round() as usize;
    if t > n {
        return Err(Error::Argument(format!("t = {t} exceeds H = {n}")));
    }
    // ln C(n, i) built incrementally, then a log-sum-exp over i <= t
    let mut terms = Vec::with_capacity(t + 1);
    let mut ln_c = 0.0f64;
    terms.push(0.0);
    for i in 1..=t {
        ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        terms.push(ln_c);
    }
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ln_sum = top + terms.iter().map(|x| (x - top).exp()).sum::<f64>().ln();
    Ok(h - ln_sum / std::f64::consts::LN_2)
}

/// H (1 - h2(d / H)): the exponent of the Gilbert-Varshamov lower bound.
pub fn gv_strength(h: f64, d: f64) -> Result<f64> {
    if !(h > 0.0) || !(d >= 0.0) || d / h > 0.5 {
        return Err(Error::Argument(format!("need H > 0 and 0 <= d/H <= 0.5, got H = {h}, d = {d}")));
    }
    Ok(h * (1.0 - h2(d / h)))
}

pub fn system_strength(key_bits: f64, s: f64) -> f64 {
    key_bits.min(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub h: f64,
    /// Tolerated error bits.
    pub t: usize,
    pub s_sphere: f64,
    pub s_gv: f64,
    pub key_bits: usize,
    /// min(key_bits, s_sphere).
    pub h_sys: f64,
}

impl SecurityReport {
    /// `t` must not exceed H/2 for the GV exponent to be defined.
    pub fn new(h: f64, t: usize, m: usize) -> Result<Self> {
        let key_bits = 100 * m;
        let s_sphere = sphere_packing_strength(h, t)?;
        Ok(SecurityReport {
            h,
            t,
            s_sphere,
            s_gv: gv_strength(h, t as f64)?,
            key_bits,
            h_sys: system_strength(key_bits as f64, s_sphere),
        })
    }
}

/// Per-iteration genuine and false match rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmrFmr {
    /// Iteration caps 1..=I.
    pub iters: Vec<usize>,
    pub gmr: Vec<f64>,
    pub fmr: Vec<f64>,
    /// Best GMR over caps whose empirical FMR is exactly zero (0 if none).
    pub gmr_at_zero_fmr: f64,
    pub mated_trials: usize,
    pub non_mated_trials: usize,
}

impl GmrFmr {
    pub const CSV_HEADER: &'static str = "iter,gmr,fmr";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for ((i, g), f) in self.iters.iter().zip(&self.gmr).zip(&self.fmr) {
            let _ = writeln!(s, "{i},{g:.6},{f:.6}");
        }
        s
    }
}

/// Each trial is the iteration by which it had succeeded, or `None`.
pub fn gmr_fmr(mated: &[Option<usize>], non_mated: &[Option<usize>], iterations: usize) -> Result<GmrFmr> {
    if mated.is_empty() || non_mated.is_empty() {
        return Err(Error::Argument("GMR/FMR need mated and non-mated trials".into()));
    }
    if iterations == 0 {
        return Err(Error::Argument("need at least one iteration".into()));
    }
    let rate = |trials: &[Option<usize>], cap: usize| {
        trials.iter().filter(|t| t.is_some_and(|i| i <= cap)).count() as f64 / trials.len() as f64
    };
    let iters: Vec<usize> = (1..=iterations).collect();
    let gmr: Vec<f64> = iters.iter().map(|&i| rate(mated, i)).collect();
    let fmr: Vec<f64> = iters.iter().map(|&i| rate(non_mated, i)).collect();
    let gmr_at_zero_fmr = gmr
        .iter()
        .zip(&fmr)
        .filter(|(_, &f)| f == 0.0)
        .map(|(&g, _)| g)
        .fold(0.0, f64::max);
    Ok(GmrFmr {
        iters,
        gmr,
        fmr,
        gmr_at_zero_fmr,
        mated_trials: mated.len(),
        non_mated_trials: non_mated.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkabilityReport {
    /// Bin centres.
    pub scores: Vec<f64>,
    pub d_local: Vec<f64>,
    pub d_sys: f64,
    pub omega: f64,
}

impl LinkabilityReport {
    pub const CSV_HEADER: &'static str = "score,d_local";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for (x, d) in self.scores.iter().zip(&self.d_local) {
            let _ = writeln!(s, "{x:.6},{d:.6}");
        }
        s
    }
}

/// Local and global linkability from histogram density estimates on a
/// shared grid of `bins` bins spanning the observed scores.
pub fn unlinkability(mated: &[f64], non_mated: &[f64], bins: usize, omega: f64) -> Result<LinkabilityReport> {
    if mated.is_empty() || non_mated.is_empty() {
        return Err(Error::Argument("linkability needs mated and non-mated scores".into()));
    }
    if bins == 0 || !(omega > 0.0) {
        return Err(Error::Argument("need bins >= 1 and omega > 0".into()));
    }
    if mated.iter().chain(non_mated).any(|x| !x.is_finite()) {
        return Err(Error::Argument("non-finite score".into()));
    }
    let lo = mated.iter().chain(non_mated).cloned().fold(f64::INFINITY, f64::min);
    let hi = mated.iter().chain(non_mated).cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let bin_of = |x: f64| (((x - lo) / width) as usize).min(bins - 1);
    let mut cm = vec![0usize; bins];
    let mut cn = vec![0usize; bins];
    for &x in mated {
        cm[bin_of(x)] += 1;
    }
    for &x in non_mated {
        cn[bin_of(x)] += 1;
    }
    let (nm, nn) = (mated.len() as f64, non_mated.len() as f64);
    let d_local: Vec<f64> = cm
        .iter()
        .zip(&cn)
        .map(|(&a, &b)| {
            if a == 0 {
                0.0
            } else if b == 0 {
                1.0
            } else {
                let lr = (a as f64 / nm) / (b as f64 / nn);
                if lr * omega <= 1.0 {
                    0.0
                } else {
                    2.0 * lr * omega / (1.0 + lr * omega) - 1.0
                }
            }
        })
        .collect();
    // sum of p(s|H_m) * D(s) * width, with p * width = count / n
    let d_sys = cm.iter().zip(&d_local).map(|(&c, d)| c as f64 * d).sum::<f64>() / nm;
    Ok(LinkabilityReport {
        scores: (0..bins).map(|i| lo + (i as f64 + 0.5) * width).collect(),
        d_local,
        d_sys: d_sys.clamp(0.0, 1.0),
        omega,
    })
}

/// Scalar summary written as JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub d_prime: Option<f64>,
    pub dof: Option<f64>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    pub s_sphere: Option<f64>,
    pub s_gv: Option<f64>,
    pub h_sys: Option<f64>,
    pub d_sys: Option<f64>,
}

impl MetricsSummary {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
