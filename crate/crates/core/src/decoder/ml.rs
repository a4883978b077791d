use crate::error::{Error, Result};

/// Maximum-likelihood decoding by exhaustive search over `codewords`.
///
/// Minimizing `||y - bpsk(c)||^2` is the same as minimizing the sum of `y_v`
/// over the support of `c`. Ties go to the earliest codeword.
pub fn ml_decode(codewords: &[Vec<u8>], y: &[f64]) -> Result<Vec<u8>> {
    let mut best: Option<(f64, &Vec<u8>)> = None;
    for c in codewords {
        if c.len() != y.len() {
            return Err(Error::Dimension { what: "received word length", expected: c.len(), got: y.len() });
        }
        let score: f64 = c.iter().zip(y).filter(|(&b, _)| b == 1).map(|(_, &v)| v).sum();
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, c));
        }
    }
    best.map(|(_, c)| c.clone()).ok_or_else(|| Error::InvalidArgument("empty codebook".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bpsk;
    use crate::codes::{enumerate_codewords, fixtures};

    fn dist(y: &[f64], c: &[u8]) -> f64 {
        y.iter().zip(bpsk(c)).map(|(a, b)| (a - b).powi(2)).sum()
    }

    #[test]
    fn exact_codeword_and_near_zero() {
        let cws = enumerate_codewords(&fixtures::hamming_7_4()).unwrap();
        for c in &cws {
            assert_eq!(&ml_decode(&cws, &bpsk(c)).unwrap(), c);
        }
        let mut y = vec![1.0; 7];
        y[3] = -0.9;
        assert_eq!(ml_decode(&cws, &y).unwrap(), vec![0; 7]);
        // Oracle: brute-force Euclidean distances.
        let best = cws.iter().min_by(|a, b| dist(&y, a).total_cmp(&dist(&y, b))).unwrap();
        assert_eq!(best, &vec![0; 7]);
    }

    #[test]
    fn result_is_no_farther_than_zero_word() {
        let cws = enumerate_codewords(&fixtures::hamming_7_4()).unwrap();
        let y = [0.3, -1.2, 0.1, -0.4, 0.8, -0.05, 0.2];
        let c = ml_decode(&cws, &y).unwrap();
        assert!(dist(&y, &c) <= dist(&y, &[0; 7]));
        assert!(ml_decode(&[], &y).is_err());
    }
}
