use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::features::FeatureVector;

const TABLE_VERSION: u32 = 1;

/// Per-dimension cut points splitting each feature into `q` equally
/// probable intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerTable {
    pub version: u32,
    pub q: usize,
    pub boundaries: Vec<Vec<f64>>,
}

/// Interval labels in `1..=q`, one per dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedVector {
    pub q: usize,
    pub labels: Vec<u16>,
}

/// Empirical quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn fit_quantizer(calibration: &[FeatureVector], q: usize) -> Result<QuantizerTable> {
    if q < 2 {
        return Err(Error::Argument(format!("need at least 2 intervals, got {q}")));
    }
    if calibration.is_empty() {
        return Err(Error::Argument("empty calibration set".into()));
    }
    let mut boundaries = Vec::with_capacity(FeatureVector::DIM);
    let mut column = Vec::with_capacity(calibration.len());
    for d in 0..FeatureVector::DIM {
        column.clear();
        column.extend(calibration.iter().map(|v| v.values()[d]));
        column.sort_by(f64::total_cmp);
        let mut distinct = column.clone();
        distinct.dedup();
        if distinct.len() < q {
            return Err(Error::Validation(format!(
                "dimension {d} has {} distinct values, fewer than q = {q}",
                distinct.len()
            )));
        }
        let cuts: Vec<f64> = (1..q).map(|j| quantile(&column, j as f64 / q as f64)).collect();
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "dimension {d}: quantile cut points are not strictly increasing"
            )));
        }
        boundaries.push(cuts);
    }
    Ok(QuantizerTable {
        version: TABLE_VERSION,
        q,
        boundaries,
    })
}

impl QuantizerTable {
    /// Label = 1 + number of cut points at or below the value, so a value
    /// equal to a cut point goes to the upper interval and out-of-range
    /// values clamp to the end intervals.
    pub fn quantize(&self, v: &FeatureVector) -> Result<QuantizedVector> {
        if self.boundaries.len() != v.values().len() {
            return Err(Error::Argument("dimension mismatch".into()));
        }
        let labels = v
            .values()
            .iter()
            .zip(&self.boundaries)
            .map(|(&x, cuts)| {
                if x.is_nan() {
                    return Err(Error::Argument("NaN feature".into()));
                }
                Ok(1 + cuts.partition_point(|&c| c <= x) as u16)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantizedVector { q: self.q, labels })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: QuantizerTable = serde_json::from_str(text)?;
        if t.version != TABLE_VERSION {
            return Err(Error::Version {
                found: t.version,
                expected: TABLE_VERSION,
            });
        }
        if t.q < 2
            || t.boundaries.len() != FeatureVector::DIM
            || t.boundaries.iter().any(|b| b.len() != t.q - 1 || b.windows(2).any(|w| w[0] >= w[1]))
        {
            return Err(Error::Validation("malformed quantizer table".into()));
        }
        Ok(t)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::SplitMix64;

    fn uniform_sample(n: usize, seed: u64) -> Vec<FeatureVector> {
        let mut rng = SplitMix64::new(seed);
        (0..n)
            .map(|_| FeatureVector::new((0..512).map(|_| rng.next_f64()).collect()).unwrap())
            .collect()
    }

    #[test]
    fn uniform_quartiles() {
        let t = fit_quantizer(&uniform_sample(4000, 1), 4).unwrap();
        for cuts in &t.boundaries {
            for (c, want) in cuts.iter().zip([0.25, 0.5, 0.75]) {
                assert!((c - want).abs() < 0.04, "{c} vs {want}");
            }
        }
    }

    #[test]
    fn sign_quantizer_on_symmetric_data() {
        let mut rng = SplitMix64::new(2);
        let data: Vec<FeatureVector> = (0..4000)
            .map(|_| FeatureVector::new((0..512).map(|_| rng.next_gaussian()).collect()).unwrap())
            .collect();
        let t = fit_quantizer(&data, 2).unwrap();
        assert!(t.boundaries.iter().all(|c| c.len() == 1 && c[0].abs() < 0.1));
    }

    #[test]
    fn constant_dimension_names_it() {
        let mut data = uniform_sample(50, 3);
        for v in &mut data {
            let mut vals = v.values().to_vec();
            vals[17] = 0.5;
            *v = FeatureVector::new(vals).unwrap();
        }
        let err = fit_quantizer(&data, 4).unwrap_err().to_string();
        assert!(err.contains("dimension 17"), "{err}");
    }

    fn fixed_table() -> QuantizerTable {
        QuantizerTable {
            version: 1,
            q: 4,
            boundaries: vec![vec![0.25, 0.5, 0.75]; 512],
        }
    }

    #[test]
    fn lookup_ties_and_clamps() {
        let t = fixed_table();
        let mut vals = vec![0.6; 512];
        vals[0] = 0.5; // on a cut point -> upper interval
        vals[1] = -9.0; // below everything
        vals[2] = 9.0;
        let z = t.quantize(&FeatureVector::new(vals).unwrap()).unwrap();
        assert_eq!(&z.labels[..4], &[3, 1, 4, 3]);
    }

    #[test]
    fn json_round_trip() {
        let t = fit_quantizer(&uniform_sample(100, 4), 8).unwrap();
        assert_eq!(QuantizerTable::from_json(&t.to_json().unwrap()).unwrap(), t);
    }
}
