use crate::bits::BitVector;
use crate::error::{Error, Result};

use super::base_graph::BaseGraph;

/// Sparse parity-check matrix stored as mutually consistent row and column
/// adjacency lists (both sorted, no duplicates).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheck {
    n: usize,
    rows_adj: Vec<Vec<usize>>,
    cols_adj: Vec<Vec<usize>>,
}

impl ParityCheck {
    /// Builds `H` from its per-check variable lists.
    pub fn from_rows(n: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut cols_adj = vec![Vec::new(); n];
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Validation(format!("duplicate edge in check {r}")));
            }
            for &v in row.iter() {
                if v >= n {
                    return Err(Error::Validation(format!(
                        "check {r} references variable {v} >= n = {n}"
                    )));
                }
                cols_adj[v].push(r);
            }
        }
        Ok(ParityCheck {
            n,
            rows_adj: rows,
            cols_adj,
        })
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Argument("ragged dense matrix".into()));
        }
        let adj = rows
            .iter()
            .map(|r| (0..n).filter(|&j| r[j] & 1 == 1).collect())
            .collect();
        Self::from_rows(n, adj)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.rows_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.rows_adj.iter().map(Vec::len).sum()
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows_adj[r]
    }

    pub fn col(&self, v: usize) -> &[usize] {
        &self.cols_adj[v]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows_adj
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols_adj
    }

    pub fn max_row_degree(&self) -> usize {
        self.rows_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_col_degree(&self) -> usize {
        self.cols_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Computes `H * word^T` over GF(2).
    pub fn syndrome(&self, word: &BitVector) -> Result<BitVector> {
        if word.len() != self.n {
            return Err(Error::Argument(format!(
                "word has {} bits, code length is {}",
                word.len(),
                self.n
            )));
        }
        Ok(BitVector::from_bools(self.rows_adj.iter().map(|row| {
            row.iter().fold(false, |acc, &v| acc ^ word.get(v))
        })))
    }

    pub fn is_codeword(&self, word: &BitVector) -> Result<bool> {
        if word.len() != self.n {
            return Err(Error::Argument(format!(
                "word has {} bits, code length is {}",
                word.len(),
                self.n
            )));
        }
        Ok(self
            .rows_adj
            .iter()
            .all(|row| !row.iter().fold(false, |acc, &v| acc ^ word.get(v))))
    }

    /// Column `j` of `H` as an `r`-bit vector.
    pub fn column_bits(&self, j: usize) -> BitVector {
        let mut out = BitVector::zeros(self.r());
        for &c in &self.cols_adj[j] {
            out.set(c, true);
        }
        out
    }
}

/// Expands every base entry `(i, j, s)` into a `z x z` circulant permutation
/// whose row `t` has its one at column `(t + s) mod z`.
pub fn lift(bg: &BaseGraph, z: usize) -> Result<ParityCheck> {
    if z == 0 {
        return Err(Error::Argument("lifting factor must be >= 1".into()));
    }
    let mut rows = vec![Vec::new(); bg.rows * z];
    for e in &bg.entries {
        let s = e.shift as usize % z;
        for t in 0..z {
            rows[e.row * z + t].push(e.col * z + (t + s) % z);
        }
    }
    ParityCheck::from_rows(bg.cols * z, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::base_graph::{parse_base_graph, BaseGraphEntry};

    #[test]
    fn zero_shift_is_identity_block() {
        let bg = BaseGraph::new(
            1,
            1,
            0,
            vec![BaseGraphEntry {
                row: 0,
                col: 0,
                shift: 0,
            }],
        )
        .unwrap();
        let h = lift(&bg, 4).unwrap();
        for t in 0..4 {
            assert_eq!(h.row(t), &[t]);
        }
    }

    #[test]
    fn circulant_shift() {
        let bg = parse_base_graph("1,1,0\n0,0,7\n").unwrap();
        let h = lift(&bg, 5).unwrap();
        // 7 mod 5 = 2
        assert_eq!(h.row(0), &[2]);
        assert_eq!(h.row(4), &[1]);
    }

    #[test]
    fn unit_lifting_is_adjacency() {
        let bg = parse_base_graph("2,3,0\n0,0,5\n0,2,9\n1,1,3\n").unwrap();
        let h = lift(&bg, 1).unwrap();
        assert_eq!(h.rows(), &[vec![0, 2], vec![1]]);
    }

    #[test]
    fn zero_lifting_rejected() {
        let bg = parse_base_graph("1,1,0\n").unwrap();
        assert!(lift(&bg, 0).is_err());
    }

    #[test]
    fn single_flip_syndrome_is_column() {
        let h = ParityCheck::from_dense(&[
            vec![1, 1, 0, 1, 0],
            vec![0, 1, 1, 0, 1],
            vec![1, 0, 1, 1, 1],
        ])
        .unwrap();
        for j in 0..5 {
            let mut w = BitVector::zeros(5);
            w.flip(j);
            assert_eq!(h.syndrome(&w).unwrap(), h.column_bits(j));
        }
        assert!(h.syndrome(&BitVector::zeros(4)).is_err());
    }

    #[test]
    fn duplicate_edges_rejected() {
        assert!(ParityCheck::from_rows(3, vec![vec![0, 0]]).is_err());
    }
}
