use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};

use super::parity::ParityCheck;

/// Systematic encoder obtained by Gauss-Jordan elimination of `H`.
///
/// Message bit `i` is written verbatim at `info_positions[i]`; parity bit `r`
/// lands at `parity_positions[r]` and equals the GF(2) inner product of
/// `parity_rows[r]` with the message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    k: usize,
    n: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    parity_rows: Vec<Vec<u64>>,
}

/// On-disk sidecar form of a [`GeneratorMatrix`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct GeneratorFile {
    pub version: u32,
    pub k: usize,
    pub n: usize,
    pub info_positions: Vec<usize>,
    pub parity_positions: Vec<usize>,
    /// One hex string per parity row (packed k-bit vectors, LSB first).
    pub parity_rows_hex: Vec<String>,
}

const GENERATOR_VERSION: u32 = 1;

#[inline]
fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
fn get(row: &[u64], j: usize) -> bool {
    (row[j / 64] >> (j % 64)) & 1 == 1
}

impl GeneratorMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn parity_positions(&self) -> &[usize] {
        &self.parity_positions
    }

    /// Parity row `r` as a k-bit vector.
    pub fn parity_row(&self, r: usize) -> BitVector {
        BitVector::from_bools((0..self.k).map(|i| get(&self.parity_rows[r], i)))
    }

    pub fn encode(&self, message: &BitVector) -> Result<BitVector> {
        if message.len() != self.k {
            return Err(Error::Argument(format!(
                "message has {} bits, encoder expects {}",
                message.len(),
                self.k
            )));
        }
        let mut packed = vec![0u64; words(self.k)];
        for i in 0..self.k {
            if message.get(i) {
                packed[i / 64] |= 1 << (i % 64);
            }
        }
        let mut out = BitVector::zeros(self.n);
        for (i, &pos) in self.info_positions.iter().enumerate() {
            if get(&packed, i) {
                out.set(pos, true);
            }
        }
        for (row, &pos) in self.parity_rows.iter().zip(&self.parity_positions) {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            if ones % 2 == 1 {
                out.set(pos, true);
            }
        }
        Ok(out)
    }

    /// Reads the message bits back out of a codeword.
    pub fn extract(&self, codeword: &BitVector) -> Result<BitVector> {
        if codeword.len() != self.n {
            return Err(Error::Argument(format!(
                "codeword has {} bits, code length is {}",
                codeword.len(),
                self.n
            )));
        }
        Ok(BitVector::from_bools(
            self.info_positions.iter().map(|&p| codeword.get(p)),
        ))
    }

    pub(crate) fn to_file(&self) -> GeneratorFile {
        GeneratorFile {
            version: GENERATOR_VERSION,
            k: self.k,
            n: self.n,
            info_positions: self.info_positions.clone(),
            parity_positions: self.parity_positions.clone(),
            parity_rows_hex: (0..self.parity_rows.len())
                .map(|r| self.parity_row(r).to_hex())
                .collect(),
        }
    }

    pub(crate) fn from_file(f: GeneratorFile) -> Result<Self> {
        if f.version != GENERATOR_VERSION {
            return Err(Error::Version {
                found: f.version,
                expected: GENERATOR_VERSION,
            });
        }
        if f.info_positions.len() != f.k || f.parity_positions.len() + f.k != f.n {
            return Err(Error::Validation("generator sidecar dimensions disagree".into()));
        }
        if f.parity_rows_hex.len() != f.parity_positions.len() {
            return Err(Error::Validation("parity row count mismatch".into()));
        }
        let parity_rows = f
            .parity_rows_hex
            .iter()
            .map(|h| {
                let bits = BitVector::from_hex(h, f.k)?;
                let mut row = vec![0u64; words(f.k)];
                for i in bits.iter().enumerate().filter(|(_, b)| *b).map(|(i, _)| i) {
                    row[i / 64] |= 1 << (i % 64);
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GeneratorMatrix {
            k: f.k,
            n: f.n,
            info_positions: f.info_positions,
            parity_positions: f.parity_positions,
            parity_rows,
        })
    }
}

/// Derives a systematic generator from `H` by Gauss-Jordan elimination.
///
/// Columns are scanned left to right and the first row with a one in the
/// current column becomes its pivot; pivot columns hold parity bits and the
/// remaining columns hold message bits. `H` must have full row rank.
pub fn derive_generator(h: &ParityCheck) -> Result<GeneratorMatrix> {
    let n = h.n();
    let r = h.r();
    let w = words(n);
    let mut m: Vec<Vec<u64>> = h
        .rows()
        .iter()
        .map(|row| {
            let mut bits = vec![0u64; w];
            for &j in row {
                bits[j / 64] |= 1 << (j % 64);
            }
            bits
        })
        .collect();

    let mut pivots = Vec::with_capacity(r);
    let mut rank = 0;
    for col in 0..n {
        if rank == r {
            break;
        }
        let Some(p) = (rank..r).find(|&i| get(&m[i], col)) else {
            continue;
        };
        m.swap(rank, p);
        let pivot_row = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && get(row, col) {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rank < r {
        return Err(Error::RankDeficient { rank, rows: r });
    }

    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let info_positions: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
    let k = info_positions.len();
    // Row i of the reduced matrix reads x[pivot_i] + sum_j m[i][info_j] x[info_j] = 0.
    let parity_rows = m
        .iter()
        .map(|row| {
            let mut out = vec![0u64; words(k)];
            for (i, &j) in info_positions.iter().enumerate() {
                if get(row, j) {
                    out[i / 64] |= 1 << (i % 64);
                }
            }
            out
        })
        .collect();
    Ok(GeneratorMatrix {
        k,
        n,
        info_positions,
        parity_positions: pivots,
        parity_rows,
    })
}
