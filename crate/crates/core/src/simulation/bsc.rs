use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::prng::SplitMix64;

/// Flips each bit independently when a uniform draw falls below `p`.
pub fn flip_with(bits: &BitVector, p: f64, rng: &mut SplitMix64) -> BitVector {
    let mut out = bits.clone();
    for i in 0..bits.len() {
        if rng.next_f64() < p {
            out.flip(i);
        }
    }
    out
}

/// Binary symmetric channel with per-stream reproducible noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BscSampler {
    p: f64,
    seed: u64,
}

impl BscSampler {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("crossover rate {p} outside [0, 1]")));
        }
        Ok(BscSampler { p, seed })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn flip(&self, bits: &BitVector, stream: u64) -> BitVector {
        flip_with(bits, self.p, &mut SplitMix64::stream(self.seed, stream))
    }
}

pub fn bsc_flip(bits: &BitVector, p: f64, seed: u64, stream: u64) -> Result<BitVector> {
    Ok(BscSampler::new(p, seed)?.flip(bits, stream))
}
