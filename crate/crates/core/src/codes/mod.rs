//! Binary linear codes given by a parity-check matrix.
//!
//! Bit vectors throughout the crate are `&[u8]` slices holding 0 or 1.

mod alist;
pub mod fixtures;
mod gf2;

pub use alist::{parse_alist, read_alist, serialize_alist};
pub use gf2::{enumerate_codewords, min_distance, rank_gf2, syndrome, MAX_ENUM_DIMENSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary `m x n` parity-check matrix with row and column adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    m: usize,
    /// Sorted variable indices per check.
    rows: Vec<Vec<usize>>,
    /// Sorted check indices per variable.
    cols: Vec<Vec<usize>>,
    /// Dense rows packed into 64-bit words.
    row_bits: Vec<Vec<u64>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-check lists of 0-based variable indices.
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 || n <= m {
            return Err(Error::InvalidMatrix(format!("need n > m >= 1, got n = {n}, m = {m}")));
        }
        let words = n.div_ceil(64);
        let mut cols = vec![Vec::new(); n];
        let mut row_bits = Vec::with_capacity(m);
        let mut sorted_rows = Vec::with_capacity(m);
        for (c, row) in rows.into_iter().enumerate() {
            let mut row = row;
            row.sort_unstable();
            if row.is_empty() {
                return Err(Error::InvalidMatrix(format!("check {c} has no entries")));
            }
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidMatrix(format!("check {c} lists a variable twice")));
            }
            let mut bits = vec![0u64; words];
            for &v in &row {
                if v >= n {
                    return Err(Error::InvalidMatrix(format!(
                        "check {c} references variable {v} >= n = {n}"
                    )));
                }
                bits[v / 64] |= 1 << (v % 64);
                cols[v].push(c);
            }
            row_bits.push(bits);
            sorted_rows.push(row);
        }
        if let Some(v) = cols.iter().position(Vec::is_empty) {
            return Err(Error::InvalidMatrix(format!("variable {v} is in no check")));
        }
        Ok(Self { n, m, rows: sorted_rows, cols, row_bits })
    }

    /// Builds a matrix from dense 0/1 rows.
    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let n = dense.first().map_or(0, Vec::len);
        if dense.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("ragged dense rows".into()));
        }
        let rows = dense
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &b)| b != 0).map(|(v, _)| v).collect())
            .collect();
        Self::from_rows(n, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Variables participating in check `c`, ascending.
    pub fn row(&self, c: usize) -> &[usize] {
        &self.rows[c]
    }

    /// Checks that variable `v` participates in, ascending.
    pub fn col(&self, v: usize) -> &[usize] {
        &self.cols[v]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub(crate) fn row_bits(&self) -> &[Vec<u64>] {
        &self.row_bits
    }

    pub fn get(&self, c: usize, v: usize) -> bool {
        self.row_bits[c][v / 64] >> (v % 64) & 1 == 1
    }

    /// Number of nonzero entries (Tanner graph edges).
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.m).map(|c| (0..self.n).map(|v| self.get(c, v) as u8).collect()).collect()
    }
}

/// A code together with the derived quantities the training loop needs.
#[derive(Debug, Clone)]
pub struct CodeSpec {
    pub pcm: ParityCheckMatrix,
    pub k: usize,
    pub d_min: Option<usize>,
}

impl CodeSpec {
    /// `d_min` is taken as given; use [`CodeSpec::with_computed_dmin`] for small codes.
    pub fn new(pcm: ParityCheckMatrix, d_min: Option<usize>) -> Result<Self> {
        if d_min == Some(0) {
            return Err(Error::InvalidArgument("d_min must be positive".into()));
        }
        let k = pcm.n() - rank_gf2(&pcm);
        if k == 0 {
            return Err(Error::InvalidMatrix("code has dimension 0".into()));
        }
        Ok(Self { pcm, k, d_min })
    }

    /// Fills in `d_min` by brute force when `k <= MAX_ENUM_DIMENSION`, else leaves it unset.
    pub fn with_computed_dmin(pcm: ParityCheckMatrix) -> Result<Self> {
        let mut spec = Self::new(pcm, None)?;
        if spec.k <= MAX_ENUM_DIMENSION {
            spec.d_min = Some(min_distance(&spec.pcm)?);
        }
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.pcm.n()
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.pcm.n() as f64
    }

    /// Packing radius `sqrt(d_min)` in BPSK signal space.
    pub fn r_pack(&self) -> Option<f64> {
        self.d_min.map(|d| (d as f64).sqrt())
    }
}

/// Degree histogram entry: `count` nodes have degree `degree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCount {
    pub degree: usize,
    pub count: usize,
}

pub fn degree_profile(lists: &[Vec<usize>]) -> Vec<DegreeCount> {
    let mut hist = std::collections::BTreeMap::new();
    for l in lists {
        *hist.entry(l.len()).or_insert(0usize) += 1;
    }
    hist.into_iter().map(|(degree, count)| DegreeCount { degree, count }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_column() {
        let err = ParityCheckMatrix::from_rows(3, vec![vec![0, 1]]).unwrap_err();
        assert!(err.to_string().contains("variable 2"));
    }

    #[test]
    fn rejects_square_matrix() {
        assert!(ParityCheckMatrix::from_dense(&[vec![1, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn hamming_spec() {
        let spec = CodeSpec::with_computed_dmin(fixtures::hamming_7_4()).unwrap();
        assert_eq!(spec.k, 4);
        assert_eq!(spec.d_min, Some(3));
        assert!((spec.rate() - 4.0 / 7.0).abs() < 1e-15);
        assert!((spec.r_pack().unwrap() - 3.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dense_round_trip() {
        let h = fixtures::hamming_7_4();
        assert_eq!(ParityCheckMatrix::from_dense(&h.to_dense()).unwrap(), h);
    }
}
