//! Synthetic stand-ins for protected face templates.
//!
//! Bits are i.i.d. Every sample is its subject's anchor XOR Bernoulli noise,
//! and anchors are a shared centre XOR Bernoulli noise. The two noise rates
//! are solved so that two samples of one subject differ in a fraction
//! `p_mated` of bits and samples of different subjects in `p_non_mated`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::pipeline::FeatureVector;
use crate::prng::SplitMix64;

use super::bsc::flip_with;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub subjects: usize,
    pub samples_per_subject: usize,
    pub template_len: usize,
    pub p_mated: f64,
    pub p_non_mated: f64,
    pub seed: u64,
}

/// Index of one comparison: (subject, sample) against (subject, sample).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    pub reference: (usize, usize),
    pub probe: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPopulation {
    pub config: SynthConfig,
    /// `templates[subject][sample]`
    pub templates: Vec<Vec<BitVector>>,
}

/// Rate `x` such that two independent Bernoulli(x) masks differ with
/// probability `rate`: 2x(1 - x) = rate.
fn half_rate(rate: f64) -> f64 {
    (1.0 - (1.0 - 2.0 * rate).max(0.0).sqrt()) / 2.0
}

const CENTRE_STREAM: u64 = 0;
const ANCHOR_TAG: u64 = 1 << 48;
const SAMPLE_TAG: u64 = 2 << 48;

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.p_mated && self.p_mated < self.p_non_mated && self.p_non_mated <= 0.5) {
            return Err(Error::Argument(format!(
                "need 0 <= p_mated < p_non_mated <= 0.5, got {} and {}",
                self.p_mated, self.p_non_mated
            )));
        }
        if self.subjects == 0 || self.samples_per_subject == 0 || self.template_len == 0 {
            return Err(Error::Argument("population dimensions must be positive".into()));
        }
        Ok(())
    }
}

impl SynthPopulation {
    pub fn generate(cfg: SynthConfig) -> Result<Self> {
        cfg.validate()?;
        let sample_noise = half_rate(cfg.p_mated);
        // anchors must differ at rate a with a (+) p_mated = p_non_mated
        let anchor_rate = (cfg.p_non_mated - cfg.p_mated) / (1.0 - 2.0 * cfg.p_mated);
        let anchor_noise = half_rate(anchor_rate);
        let mut rng = SplitMix64::stream(cfg.seed, CENTRE_STREAM);
        let centre = BitVector::from_bools((0..cfg.template_len).map(|_| rng.next_bool()));
        let templates = (0..cfg.subjects)
            .map(|s| {
                let mut rng = SplitMix64::stream(cfg.seed, ANCHOR_TAG | s as u64);
                let anchor = flip_with(&centre, anchor_noise, &mut rng);
                (0..cfg.samples_per_subject)
                    .map(|j| {
                        let stream = SAMPLE_TAG | ((s as u64) << 16) | j as u64;
                        flip_with(&anchor, sample_noise, &mut SplitMix64::stream(cfg.seed, stream))
                    })
                    .collect()
            })
            .collect();
        Ok(SynthPopulation {
            config: cfg,
            templates,
        })
    }

    pub fn get(&self, (subject, sample): (usize, usize)) -> &BitVector {
        &self.templates[subject][sample]
    }

    /// `count` mated comparisons cycling over subjects: sample 0 of a
    /// subject against one of its other samples.
    pub fn mated_pairs(&self, count: usize) -> Result<Vec<PairIndex>> {
        let s = self.config.subjects;
        let spp = self.config.samples_per_subject;
        if spp < 2 {
            return Err(Error::Argument("mated pairs need two samples per subject".into()));
        }
        Ok((0..count)
            .map(|k| PairIndex {
                reference: (k % s, 0),
                probe: (k % s, 1 + (k / s) % (spp - 1)),
            })
            .collect())
    }

    /// `count` non-mated comparisons: sample 0 of one subject against a
    /// probe sample of another.
    pub fn non_mated_pairs(&self, count: usize) -> Result<Vec<PairIndex>> {
        let s = self.config.subjects;
        let spp = self.config.samples_per_subject;
        if s < 2 {
            return Err(Error::Argument("non-mated pairs need two subjects".into()));
        }
        Ok((0..count)
            .map(|k| {
                let a = k % s;
                let b = (a + 1 + (k / s) % (s - 1)) % s;
                PairIndex {
                    reference: (a, 0),
                    probe: (b, if spp > 1 { 1 } else { 0 }),
                }
            })
            .collect())
    }

    /// Population file: `subject,sample,bits,template_hex` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("subject,sample,bits,template_hex\n");
        for (i, samples) in self.templates.iter().enumerate() {
            for (j, t) in samples.iter().enumerate() {
                let _ = writeln!(s, "s{i:05},{j},{},{}", t.len(), t.to_hex());
            }
        }
        s
    }

    /// Reads a population file back; subjects keep file order.
    pub fn parse_templates(text: &str) -> Result<Vec<(String, BitVector)>> {
        let mut out = Vec::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(Error::ParseLine {
                    line: idx + 1,
                    msg: "expected subject,sample,bits,template_hex".into(),
                });
            }
            let bits: usize = f[2].parse().map_err(|_| Error::ParseLine {
                line: idx + 1,
                msg: format!("bad bit count {:?}", f[2]),
            })?;
            out.push((f[0].to_string(), BitVector::from_hex(f[3], bits)?));
        }
        Ok(out)
    }
}

impl SynthPopulation {
    /// Rebuilds a population from its file. Rows of one subject must be
    /// contiguous and every subject needs the same number of samples. The
    /// flip rates are not stored and come back as NaN.
    pub fn from_csv(text: &str, seed: u64) -> Result<Self> {
        let rows = Self::parse_templates(text)?;
        let mut templates: Vec<Vec<BitVector>> = Vec::new();
        let mut last: Option<String> = None;
        for (subject, bits) in rows {
            if last.as_deref() != Some(subject.as_str()) {
                templates.push(Vec::new());
                last = Some(subject);
            }
            templates.last_mut().expect("pushed").push(bits);
        }
        let first = templates
            .first()
            .and_then(|s| s.first())
            .ok_or_else(|| Error::Validation("empty population".into()))?;
        let (spp, len) = (templates[0].len(), first.len());
        if templates.iter().any(|s| s.len() != spp || s.iter().any(|t| t.len() != len)) {
            return Err(Error::Validation("ragged population file".into()));
        }
        Ok(SynthPopulation {
            config: SynthConfig {
                subjects: templates.len(),
                samples_per_subject: spp,
                template_len: len,
                p_mated: f64::NAN,
                p_non_mated: f64::NAN,
                seed,
            },
            templates,
        })
    }
}

/// Gaussian embeddings: subject centres ~ N(0, I), samples = centre + N(0, noise^2 I).
pub fn synth_embeddings(
    subjects: usize,
    samples_per_subject: usize,
    noise: f64,
    seed: u64,
) -> Vec<(String, FeatureVector)> {
    let mut out = Vec::with_capacity(subjects * samples_per_subject);
    for s in 0..subjects {
        let mut rng = SplitMix64::stream(seed, ANCHOR_TAG | s as u64);
        let centre: Vec<f64> = (0..FeatureVector::DIM).map(|_| rng.next_gaussian()).collect();
        for j in 0..samples_per_subject {
            let mut rng = SplitMix64::stream(seed, SAMPLE_TAG | ((s as u64) << 16) | j as u64);
            let v = centre.iter().map(|c| c + noise * rng.next_gaussian()).collect();
            out.push((format!("s{s:05}"), FeatureVector::new(v).expect("finite")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p_m: f64, p_nm: f64) -> SynthConfig {
        SynthConfig {
            subjects: 200,
            samples_per_subject: 3,
            template_len: 1536,
            p_mated: p_m,
            p_non_mated: p_nm,
            seed: 21,
        }
    }

    fn mean_distance(pop: &SynthPopulation, pairs: &[PairIndex]) -> f64 {
        let len = pop.config.template_len as f64;
        pairs
            .iter()
            .map(|p| pop.get(p.reference).hamming(pop.get(p.probe)).unwrap() as f64 / len)
            .sum::<f64>()
            / pairs.len() as f64
    }

    #[test]
    fn zero_mated_rate_gives_identical_samples() {
        let pop = SynthPopulation::generate(cfg(0.0, 0.26)).unwrap();
        for p in pop.mated_pairs(200).unwrap() {
            assert_eq!(pop.get(p.reference), pop.get(p.probe));
        }
    }

    #[test]
    fn calibrated_rates() {
        let pop = SynthPopulation::generate(cfg(0.156, 0.26)).unwrap();
        let m = mean_distance(&pop, &pop.mated_pairs(400).unwrap());
        let nm = mean_distance(&pop, &pop.non_mated_pairs(400).unwrap());
        assert!((m - 0.156).abs() < 0.005, "mated {m}");
        assert!((nm - 0.26).abs() < 0.005, "non-mated {nm}");
    }

    #[test]
    fn invalid_rates() {
        assert!(SynthPopulation::generate(cfg(0.3, 0.26)).is_err());
        assert!(SynthPopulation::generate(cfg(0.1, 0.6)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut c = cfg(0.1, 0.3);
        c.subjects = 3;
        let pop = SynthPopulation::generate(c).unwrap();
        let rows = SynthPopulation::parse_templates(&pop.to_csv()).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(&rows[4].1, pop.get((1, 1)));
    }
}
