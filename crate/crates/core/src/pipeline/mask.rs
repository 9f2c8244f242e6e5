use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::prng::SplitMix64;

use super::lssc::{BinaryTemplate, Stage};

/// Seeded Fisher-Yates permutation of template bit positions:
/// `permuted[i] = original[order[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<u32>,
}

impl Permutation {
    pub fn new(seed: u64, len: usize) -> Self {
        let mut order: Vec<u32> = (0..len as u32).collect();
        let mut rng = SplitMix64::new(seed);
        for i in (1..len).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            order.swap(i, j);
        }
        Permutation { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn permute(&self, t: &BinaryTemplate) -> Result<BinaryTemplate> {
        self.check(t, Stage::Lssc)?;
        let bits = BitVector::from_bools(self.order.iter().map(|&src| t.bits.get(src as usize)));
        BinaryTemplate::new(bits, Stage::Permuted)
    }

    pub fn unpermute(&self, t: &BinaryTemplate) -> Result<BinaryTemplate> {
        self.check(t, Stage::Permuted)?;
        let mut bits = BitVector::zeros(t.len());
        for (i, &src) in self.order.iter().enumerate() {
            bits.set(src as usize, t.bits.get(i));
        }
        BinaryTemplate::new(bits, Stage::Lssc)
    }

    fn check(&self, t: &BinaryTemplate, stage: Stage) -> Result<()> {
        if t.stage != stage {
            return Err(Error::Argument(format!("expected a {stage:?} template, got {:?}", t.stage)));
        }
        if t.len() != self.order.len() {
            return Err(Error::Argument(format!(
                "permutation covers {} bits, template has {}",
                self.order.len(),
                t.len()
            )));
        }
        Ok(())
    }
}

/// Application-wide mask `r`: bit i is 1 iff `u_i > kappa`, so a fraction
/// `kappa` of positions is zeroed on average.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskBits {
    pub bits: BitVector,
    pub kappa: f64,
    pub seed: u64,
}

/// The uniform draws behind every mask of a given seed. Masks for a larger
/// kappa zero a superset of positions.
pub fn mask_uniforms(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..len).map(|_| rng.next_f64()).collect()
}

pub fn gen_mask(kappa: f64, seed: u64, len: usize) -> Result<MaskBits> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::Argument(format!("kappa {kappa} outside [0, 1]")));
    }
    let bits = BitVector::from_bools(mask_uniforms(seed, len).into_iter().map(|u| u > kappa));
    Ok(MaskBits { bits, kappa, seed })
}

/// Bitwise AND of a template with the mask.
pub fn apply_mask(t: &BinaryTemplate, r: &MaskBits) -> Result<BinaryTemplate> {
    if t.len() != r.bits.len() {
        return Err(Error::Argument(format!(
            "mask has {} bits, template has {}",
            r.bits.len(),
            t.len()
        )));
    }
    BinaryTemplate::new(t.bits.and(&r.bits)?, Stage::Masked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_template(seed: u64, stage: Stage) -> BinaryTemplate {
        let mut rng = SplitMix64::new(seed);
        BinaryTemplate::new(BitVector::from_bools((0..1536).map(|_| rng.next_bool())), stage).unwrap()
    }

    #[test]
    fn permutation_round_trip_and_distance() {
        let p = Permutation::new(42, 1536);
        let a = random_template(1, Stage::Lssc);
        let b = random_template(2, Stage::Lssc);
        let pa = p.permute(&a).unwrap();
        let pb = p.permute(&b).unwrap();
        assert_eq!(p.unpermute(&pa).unwrap(), a);
        assert_eq!(pa.bits.hamming(&pb.bits).unwrap(), a.bits.hamming(&b.bits).unwrap());
        assert_ne!(pa.bits, a.bits);
    }

    #[test]
    fn permutation_is_reproducible() {
        assert_eq!(Permutation::new(7, 1536), Permutation::new(7, 1536));
        assert_ne!(Permutation::new(7, 1536), Permutation::new(8, 1536));
        // frozen values guard the cross-platform contract
        let p = Permutation::new(7, 1536);
        assert_eq!(p.order[..4], [1448, 317, 90, 901]);
        assert_eq!(p.order[1534..], [1314, 471]);
    }

    #[test]
    fn mask_endpoints() {
        assert_eq!(gen_mask(0.0, 3, 1536).unwrap().bits, BitVector::ones(1536));
        assert_eq!(gen_mask(1.0, 3, 1536).unwrap().bits, BitVector::zeros(1536));
        assert!(gen_mask(1.5, 3, 10).is_err());
    }

    #[test]
    fn mask_zero_fraction_within_binomial_interval() {
        // zeros ~ Binomial(1536, 0.25): mean 384, sd 16.97; 99.9% two-sided -> +-3.29 sd
        for seed in 0..20 {
            let zeros = 1536 - gen_mask(0.25, seed, 1536).unwrap().bits.count_ones();
            assert!((zeros as f64 - 384.0).abs() <= 3.29 * 16.97, "seed {seed}: {zeros}");
        }
    }

    #[test]
    fn masking_identities() {
        let a = random_template(3, Stage::Permuted);
        let b = random_template(4, Stage::Permuted);
        let ones = gen_mask(0.0, 1, 1536).unwrap();
        assert_eq!(apply_mask(&a, &ones).unwrap().bits, a.bits);
        let zeros = gen_mask(1.0, 1, 1536).unwrap();
        let (ma, mb) = (apply_mask(&a, &zeros).unwrap(), apply_mask(&b, &zeros).unwrap());
        assert_eq!(ma.bits.hamming(&mb.bits).unwrap(), 0);

        let r = gen_mask(0.4, 9, 1536).unwrap();
        let (ma, mb) = (apply_mask(&a, &r).unwrap(), apply_mask(&b, &r).unwrap());
        let direct = a.bits.xor(&b.bits).unwrap().and(&r.bits).unwrap().count_ones();
        assert_eq!(ma.bits.hamming(&mb.bits).unwrap(), direct);
        assert!(direct <= a.bits.hamming(&b.bits).unwrap());
    }

    #[test]
    fn length_mismatch() {
        let a = random_template(3, Stage::Permuted);
        assert!(apply_mask(&a, &gen_mask(0.1, 1, 1024).unwrap()).is_err());
    }
}
