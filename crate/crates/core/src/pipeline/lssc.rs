use crate::bits::BitVector;
use crate::error::{Error, Result};

use super::features::FeatureVector;
use super::quantizer::QuantizedVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Lssc,
    Permuted,
    Masked,
}

/// A binarized feature vector of `512 * m` bits at a given pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryTemplate {
    pub bits: BitVector,
    pub stage: Stage,
}

impl BinaryTemplate {
    pub fn new(bits: BitVector, stage: Stage) -> Result<Self> {
        if bits.is_empty() || bits.len() % FeatureVector::DIM != 0 {
            return Err(Error::Argument(format!(
                "template length {} is not a positive multiple of 512",
                bits.len()
            )));
        }
        Ok(BinaryTemplate { bits, stage })
    }

    /// Bits per feature dimension.
    pub fn m(&self) -> usize {
        self.bits.len() / FeatureVector::DIM
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Label `k` becomes `k - 1` ones followed by `q - k` zeros; dimensions are
/// concatenated in order. Hamming distance between codes equals the L1
/// distance between labels.
pub fn lssc_encode(z: &QuantizedVector) -> Result<BinaryTemplate> {
    let q = z.q;
    if q < 2 {
        return Err(Error::Argument(format!("q = {q} < 2")));
    }
    let m = q - 1;
    let mut bits = BitVector::zeros(z.labels.len() * m);
    for (d, &k) in z.labels.iter().enumerate() {
        let k = k as usize;
        if k < 1 || k > q {
            return Err(Error::Argument(format!("label {k} at dimension {d} outside 1..={q}")));
        }
        for b in 0..k - 1 {
            bits.set(d * m + b, true);
        }
    }
    BinaryTemplate::new(bits, Stage::Lssc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(q: usize, label: u16) -> Vec<bool> {
        let mut labels = vec![1u16; 512];
        labels[0] = label;
        let t = lssc_encode(&QuantizedVector { q, labels }).unwrap();
        (0..q - 1).map(|i| t.bits.get(i)).collect()
    }

    #[test]
    fn endpoints() {
        assert_eq!(single(4, 1), vec![false, false, false]);
        assert_eq!(single(4, 4), vec![true, true, true]);
        assert_eq!(single(4, 2), vec![true, false, false]);
    }

    #[test]
    fn element_distance() {
        let a = single(4, 2);
        let b = single(4, 4);
        assert_eq!(a.iter().zip(&b).filter(|(x, y)| x != y).count(), 2);
    }

    #[test]
    fn out_of_range_label() {
        let mut labels = vec![1u16; 512];
        labels[9] = 5;
        assert!(lssc_encode(&QuantizedVector { q: 4, labels }).is_err());
    }
}
