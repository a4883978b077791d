//! GF(2) linear algebra and brute-force code enumeration.

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Largest code dimension for which codewords are enumerated.
pub const MAX_ENUM_DIMENSION: usize = 20;

/// Reduced row echelon form in place; returns pivot columns in row order.
fn rref(rows: &mut Vec<Vec<u64>>, n: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (r..rows.len()).find(|&i| rows[i][w] & b != 0) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[w] & b != 0 {
                row.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank_gf2(pcm: &ParityCheckMatrix) -> usize {
    let mut rows = pcm.row_bits().to_vec();
    rref(&mut rows, pcm.n()).len()
}

/// `H * bits^T` over GF(2).
pub fn syndrome(pcm: &ParityCheckMatrix, bits: &[u8]) -> Result<Vec<u8>> {
    if bits.len() != pcm.n() {
        return Err(Error::Dimension { what: "word length", expected: pcm.n(), got: bits.len() });
    }
    Ok(pcm.rows().iter().map(|row| row.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1))).collect())
}

/// Null-space basis of `H` as packed words.
fn kernel_basis(pcm: &ParityCheckMatrix) -> Vec<Vec<u64>> {
    let n = pcm.n();
    let mut rows = pcm.row_bits().to_vec();
    let pivots = rref(&mut rows, n);
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..n)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![0u64; n.div_ceil(64)];
            v[f / 64] |= 1 << (f % 64);
            for (row, &p) in rows.iter().zip(&pivots) {
                if row[f / 64] >> (f % 64) & 1 == 1 {
                    v[p / 64] |= 1 << (p % 64);
                }
            }
            v
        })
        .collect()
}

fn unpack(words: &[u64], n: usize) -> Vec<u8> {
    (0..n).map(|v| (words[v / 64] >> (v % 64) & 1) as u8).collect()
}

/// All `2^k` codewords. Codeword `i` is the XOR of the basis vectors selected by
/// the bits of `i`, so index 0 is the all-zero word.
pub fn enumerate_codewords(pcm: &ParityCheckMatrix) -> Result<Vec<Vec<u8>>> {
    let basis = kernel_basis(pcm);
    let k = basis.len();
    if k > MAX_ENUM_DIMENSION {
        return Err(Error::TooLarge { k, limit: MAX_ENUM_DIMENSION });
    }
    let words = pcm.n().div_ceil(64);
    let mut packed: Vec<Vec<u64>> = Vec::with_capacity(1 << k);
    packed.push(vec![0; words]);
    for i in 1usize..(1 << k) {
        let mut w = packed[i & (i - 1)].clone();
        w.iter_mut().zip(&basis[i.trailing_zeros() as usize]).for_each(|(x, y)| *x ^= y);
        packed.push(w);
    }
    Ok(packed.iter().map(|w| unpack(w, pcm.n())).collect())
}

/// Minimum Hamming weight over nonzero codewords.
pub fn min_distance(pcm: &ParityCheckMatrix) -> Result<usize> {
    let codewords = enumerate_codewords(pcm)?;
    codewords
        .iter()
        .skip(1)
        .map(|c| c.iter().filter(|&&b| b == 1).count())
        .min()
        .ok_or_else(|| Error::InvalidMatrix("code has no nonzero codewords".into()))
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use proptest::prelude::*;

    use super::*;
    use crate::codes::fixtures;

    #[test]
    fn hamming_rank_and_codewords() {
        let h = fixtures::hamming_7_4();
        assert_eq!(rank_gf2(&h), 3);
        let cws = enumerate_codewords(&h).unwrap();
        assert_eq!(cws.len(), 16);
        let unique: HashSet<_> = cws.iter().collect();
        assert_eq!(unique.len(), 16);
        for c in &cws {
            assert!(syndrome(&h, c).unwrap().iter().all(|&s| s == 0));
        }
        assert_eq!(min_distance(&h).unwrap(), 3);
    }

    #[test]
    fn hamming_codewords_match_exhaustive_search() {
        let h = fixtures::hamming_7_4();
        let mut brute: Vec<Vec<u8>> = (0u32..128)
            .map(|x| (0..7).map(|v| (x >> v & 1) as u8).collect::<Vec<u8>>())
            .filter(|w| syndrome(&h, w).unwrap().iter().all(|&s| s == 0))
            .collect();
        let mut enumerated = enumerate_codewords(&h).unwrap();
        brute.sort();
        enumerated.sort();
        assert_eq!(brute, enumerated);
    }

    #[test]
    fn repetition_code() {
        let h = fixtures::repetition_3();
        let mut cws = enumerate_codewords(&h).unwrap();
        cws.sort();
        assert_eq!(cws, vec![vec![0, 0, 0], vec![1, 1, 1]]);
        assert_eq!(min_distance(&h).unwrap(), 3);
    }

    #[test]
    fn bch_15_7_parameters() {
        let h = fixtures::bch_15_7();
        assert_eq!(h.n() - rank_gf2(&h), 7);
        assert_eq!(min_distance(&h).unwrap(), 5);
    }

    #[test]
    fn bch_63_dimensions_and_guard() {
        let h36 = fixtures::bch_63_36();
        let h45 = fixtures::bch_63_45();
        assert_eq!(63 - rank_gf2(&h36), 36);
        assert_eq!(63 - rank_gf2(&h45), 45);
        assert!(matches!(enumerate_codewords(&h36), Err(Error::TooLarge { k: 36, .. })));
    }

    #[test]
    fn identity_like_and_duplicated_rows() {
        let h =
            ParityCheckMatrix::from_dense(&[vec![1, 0, 0, 1, 1], vec![0, 1, 0, 1, 0], vec![0, 0, 1, 0, 1]])
                .unwrap();
        assert_eq!(rank_gf2(&h), 3);
        let dup =
            ParityCheckMatrix::from_dense(&[vec![1, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 1, 0, 1]]).unwrap();
        assert_eq!(rank_gf2(&dup), 2);
    }

    #[test]
    fn single_flip_syndrome_is_column() {
        let h = fixtures::hamming_7_4();
        for v in 0..7 {
            let mut w = vec![0u8; 7];
            w[v] = 1;
            let s = syndrome(&h, &w).unwrap();
            let col: Vec<u8> = (0..3).map(|c| h.get(c, v) as u8).collect();
            assert_eq!(s, col);
        }
        assert!(syndrome(&h, &[0; 6]).is_err());
    }

    fn random_dense() -> impl Strategy<Value = Vec<Vec<u8>>> {
        (2usize..6, 7usize..12)
            .prop_flat_map(|(m, n)| prop::collection::vec(prop::collection::vec(0u8..2, n), m))
    }

    proptest! {
        #[test]
        fn rank_invariant_under_row_ops(dense in random_dense(), a in 0usize..6, b in 0usize..6) {
            let Ok(h) = ParityCheckMatrix::from_dense(&dense) else { return Ok(()) };
            let m = dense.len();
            let (a, b) = (a % m, b % m);
            let mut permuted = dense.clone();
            permuted.swap(a, b);
            let mut added = dense.clone();
            if a != b {
                let src = added[b].clone();
                added[a].iter_mut().zip(&src).for_each(|(x, y)| *x ^= y);
            }
            let r = rank_gf2(&h);
            prop_assert_eq!(rank_gf2(&ParityCheckMatrix::from_dense(&permuted).unwrap()), r);
            if let Ok(h2) = ParityCheckMatrix::from_dense(&added) {
                prop_assert_eq!(rank_gf2(&h2), r);
            }
        }

        #[test]
        fn enumerated_words_are_codewords(dense in random_dense()) {
            let Ok(h) = ParityCheckMatrix::from_dense(&dense) else { return Ok(()) };
            let cws = enumerate_codewords(&h).unwrap();
            prop_assert_eq!(cws.len(), 1usize << (h.n() - rank_gf2(&h)));
            prop_assert!(cws[0].iter().all(|&b| b == 0));
            for c in &cws {
                prop_assert!(syndrome(&h, c).unwrap().iter().all(|&s| s == 0));
            }
            let d = min_distance(&h).unwrap();
            let brute = cws.iter().skip(1).map(|c| c.iter().filter(|&&x| x == 1).count()).min().unwrap();
            prop_assert!(d >= 1);
            prop_assert_eq!(d, brute);
        }

        #[test]
        fn alist_round_trip(dense in random_dense()) {
            let Ok(h) = ParityCheckMatrix::from_dense(&dense) else { return Ok(()) };
            let text = crate::codes::serialize_alist(&h);
            prop_assert_eq!(crate::codes::parse_alist(&text).unwrap(), h);
        }
    }
}
