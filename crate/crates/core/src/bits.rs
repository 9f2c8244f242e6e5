//! Packed bit vectors.
//!
//! Bit `i` lives in byte `i / 8` at position `i % 8` (least significant bit
//! first). Pad bits in the final byte are always zero, so byte-level equality,
//! hashing and hex encoding are canonical.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    bytes: Vec<u8>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            bytes: vec![0; len.div_ceil(8)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            bytes: vec![0xff; len.div_ceil(8)],
        };
        v.clear_pad();
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = BitVector::zeros(0);
        for b in bits {
            v.push(b);
        }
        v
    }

    /// Builds a vector from packed bytes, rejecting non-zero pad bits.
    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Parse(format!(
                "{} bytes cannot hold exactly {} bits",
                bytes.len(),
                len
            )));
        }
        let v = BitVector { len, bytes };
        let mut canon = v.clone();
        canon.clear_pad();
        if canon != v {
            return Err(Error::Parse("non-zero pad bits in final byte".into()));
        }
        Ok(v)
    }

    pub fn from_hex(hex_str: &str, len: usize) -> Result<Self> {
        let bytes = hex::decode(hex_str.trim()).map_err(|e| Error::Parse(format!("hex: {e}")))?;
        Self::from_bytes(bytes, len)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.bytes[i >> 3] >> (i & 7)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u8 << (i & 7);
        if value {
            self.bytes[i >> 3] |= mask;
        } else {
            self.bytes[i >> 3] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.bytes[i >> 3] ^= 1u8 << (i & 7);
    }

    pub fn push(&mut self, value: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        self.zip_bytes(other, |a, b| a ^ b)
    }

    pub fn and(&self, other: &BitVector) -> Result<BitVector> {
        self.zip_bytes(other, |a, b| a & b)
    }

    pub fn not(&self) -> BitVector {
        let mut v = BitVector {
            len: self.len,
            bytes: self.bytes.iter().map(|b| !b).collect(),
        };
        v.clear_pad();
        v
    }

    pub fn hamming(&self, other: &BitVector) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Copies bits `start..end` into a new vector.
    pub fn slice(&self, start: usize, end: usize) -> BitVector {
        assert!(start <= end && end <= self.len);
        BitVector::from_bools((start..end).map(|i| self.get(i)))
    }

    pub fn extend_from(&mut self, other: &BitVector) {
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a BitVector>>(parts: I) -> BitVector {
        let mut out = BitVector::zeros(0);
        for p in parts {
            out.extend_from(p);
        }
        out
    }

    fn check_len(&self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::Argument(format!(
                "bit length mismatch: {} vs {}",
                self.len, other.len
            )));
        }
        Ok(())
    }

    fn zip_bytes(&self, other: &BitVector, f: impl Fn(u8, u8) -> u8) -> Result<BitVector> {
        self.check_len(other)?;
        Ok(BitVector {
            len: self.len,
            bytes: self
                .bytes
                .iter()
                .zip(&other.bytes)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn clear_pad(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= (1u8 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[{}](", self.len)?;
        for b in self.iter().take(64) {
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.len > 64 {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}
