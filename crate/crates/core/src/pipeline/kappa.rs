use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::prng::SplitMix64;

use super::lssc::BinaryTemplate;
use super::mask::mask_uniforms;

/// Outcome of the masking-rate search.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaSearch {
    pub kappa: f64,
    /// Fraction of inter-class pairs whose masked distance exceeds tau.
    pub achieved: f64,
    /// Empirical (1 - quantile) percentile of the masked distances, as a
    /// fraction of template length.
    pub percentile: f64,
}

const BISECTION_STEPS: usize = 60;
/// Slack, as a fraction of template length, within which an unmasked
/// population already counts as meeting tau.
const TAU_SLACK: f64 = 0.005;

/// Up to `max_pairs` pairs of templates from different subjects, chosen
/// deterministically from `seed`.
pub fn inter_class_pairs(
    labels: &[String],
    max_pairs: usize,
    seed: u64,
) -> Vec<(usize, usize)> {
    let n = labels.len();
    let total = n * n.saturating_sub(1) / 2;
    if total <= max_pairs {
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if labels[i] != labels[j] {
                    out.push((i, j));
                }
            }
        }
        return out;
    }
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(max_pairs);
    let mut attempts = 0;
    while out.len() < max_pairs && attempts < max_pairs * 20 {
        attempts += 1;
        let i = rng.below(n as u64) as usize;
        let j = rng.below(n as u64) as usize;
        if i != j && labels[i] != labels[j] {
            out.push((i.min(j), i.max(j)));
        }
    }
    out
}

struct MaskedCounter {
    diffs: Vec<Vec<u64>>,
    uniforms: Vec<f64>,
    len: usize,
}

impl MaskedCounter {
    fn mask_words(&self, kappa: f64) -> Vec<u64> {
        let mut words = vec![0u64; self.len.div_ceil(64)];
        for (i, &u) in self.uniforms.iter().enumerate() {
            if u > kappa {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        words
    }

    fn distances(&self, kappa: f64) -> Vec<usize> {
        let mask = self.mask_words(kappa);
        self.diffs
            .iter()
            .map(|d| d.iter().zip(&mask).map(|(a, b)| (a & b).count_ones() as usize).sum())
            .collect()
    }

    fn fraction_above(&self, kappa: f64, threshold: f64) -> f64 {
        let above = self
            .distances(kappa)
            .into_iter()
            .filter(|&d| d as f64 > threshold)
            .count();
        above as f64 / self.diffs.len() as f64
    }
}

fn to_words(b: &BitVector) -> Vec<u64> {
    let mut w = vec![0u64; b.len().div_ceil(64)];
    for (i, chunk) in b.as_bytes().iter().enumerate() {
        w[i / 8] |= (*chunk as u64) << (8 * (i % 8));
    }
    w
}

fn lower_percentile(mut d: Vec<usize>, quantile: f64) -> usize {
    d.sort_unstable();
    let k = ((1.0 - quantile) * d.len() as f64).floor() as usize;
    d[k.min(d.len() - 1)]
}

/// Finds the largest mask zero fraction `kappa` for which at least
/// `quantile` of the inter-class pairs keep a masked distance above
/// `tau * len`. Every candidate mask thresholds the same uniform draws from
/// `mask_seed`, so the fraction is monotone in `kappa` and bisection applies.
pub fn search_kappa(
    pairs: &[(BinaryTemplate, BinaryTemplate)],
    tau: f64,
    quantile: f64,
    mask_seed: u64,
) -> Result<KappaSearch> {
    if pairs.is_empty() {
        return Err(Error::Argument("no inter-class pairs".into()));
    }
    if !(0.0..=1.0).contains(&tau) || !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::Argument(format!("invalid tau {tau} or quantile {quantile}")));
    }
    let len = pairs[0].0.len();
    let diffs = pairs
        .iter()
        .map(|(a, b)| Ok(to_words(&a.bits.xor(&b.bits)?)))
        .collect::<Result<Vec<_>>>()?;
    let counter = MaskedCounter {
        diffs,
        uniforms: mask_uniforms(mask_seed, len),
        len,
    };
    let threshold = tau * len as f64;
    let finish = |kappa: f64| {
        let d = counter.distances(kappa);
        KappaSearch {
            kappa,
            achieved: counter.fraction_above(kappa, threshold),
            percentile: lower_percentile(d, quantile) as f64 / len as f64,
        }
    };

    if counter.fraction_above(0.0, threshold) < quantile {
        // sup of thresholds still exceeded by `quantile` of the pairs
        let max_bits = lower_percentile(counter.distances(0.0), quantile);
        if threshold - max_bits as f64 <= TAU_SLACK * len as f64 {
            return Ok(finish(0.0));
        }
        return Err(Error::Unreachable {
            tau,
            max_tau: max_bits as f64 / len as f64,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if counter.fraction_above(mid, threshold) >= quantile {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(finish(lo))
}
