//! The alist sparse-matrix text format.
//!
//! ```text
//! n m
//! max_col_degree max_row_degree
//! <n column degrees>
//! <m row degrees>
//! <n lines: 1-based check indices of each column, zero padded>
//! <m lines: 1-based variable indices of each row, zero padded>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::ParityCheckMatrix;
use crate::error::{AlistError, Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), last: 0 }
    }

    /// Next non-blank line as parsed integers, with its 1-based line number.
    fn next_ints(&mut self) -> Result<(usize, Vec<usize>), AlistError> {
        for (i, line) in self.inner.by_ref() {
            if line.trim().is_empty() {
                continue;
            }
            self.last = i + 1;
            let ints = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| AlistError::Malformed {
                        line: i + 1,
                        detail: format!("`{tok}` is not a nonnegative integer"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok((i + 1, ints));
        }
        Err(AlistError::Malformed { line: self.last + 1, detail: "unexpected end of input".into() })
    }
}

fn header_pair(lines: &mut Lines<'_>, what: &str) -> Result<(usize, usize), AlistError> {
    let (line, ints) = lines.next_ints().map_err(|e| match e {
        AlistError::Malformed { line, detail } => AlistError::MalformedHeader { line, detail },
        other => other,
    })?;
    match ints[..] {
        [a, b] => Ok((a, b)),
        _ => Err(AlistError::MalformedHeader {
            line,
            detail: format!("expected two integers ({what}), found {}", ints.len()),
        }),
    }
}

fn degree_line(lines: &mut Lines<'_>, count: usize, max: usize) -> Result<Vec<usize>, AlistError> {
    let (line, ints) = lines.next_ints()?;
    if ints.len() != count {
        return Err(AlistError::MalformedHeader {
            line,
            detail: format!("expected {count} degrees, found {}", ints.len()),
        });
    }
    let found_max = ints.iter().copied().max().unwrap_or(0);
    if found_max != max {
        return Err(AlistError::DegreeMismatch { line, declared: max, found: found_max });
    }
    if ints.contains(&0) {
        return Err(AlistError::MalformedHeader { line, detail: "zero degree".into() });
    }
    Ok(ints)
}

/// One adjacency line: the first `degree` entries are 1-based indices in
/// `[1, max_index]`; anything after them must be zero padding.
fn adjacency_line(lines: &mut Lines<'_>, degree: usize, max_index: usize) -> Result<Vec<usize>, AlistError> {
    let (line, ints) = lines.next_ints()?;
    if ints.len() < degree {
        return Err(AlistError::DegreeMismatch { line, declared: degree, found: ints.len() });
    }
    let mut out = Vec::with_capacity(degree);
    for &idx in &ints[..degree] {
        if idx == 0 || idx > max_index {
            return Err(AlistError::IndexOutOfRange { line, index: idx, max: max_index });
        }
        out.push(idx - 1);
    }
    let extra = ints[degree..].iter().filter(|&&x| x != 0).count();
    if extra > 0 {
        return Err(AlistError::DegreeMismatch { line, declared: degree, found: degree + extra });
    }
    let mut sorted = out.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(AlistError::Malformed { line, detail: "repeated index".into() });
    }
    Ok(out)
}

/// Parses alist text into a parity-check matrix.
pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut lines = Lines::new(text);
    let (n, m) = header_pair(&mut lines, "n m")?;
    if n == 0 || m == 0 {
        return Err(AlistError::MalformedHeader { line: lines.last, detail: "zero dimension".into() }.into());
    }
    let (max_col, max_row) = header_pair(&mut lines, "max degrees")?;
    let col_deg = degree_line(&mut lines, n, max_col)?;
    let row_deg = degree_line(&mut lines, m, max_row)?;

    let mut cols = Vec::with_capacity(n);
    for &d in &col_deg {
        cols.push(adjacency_line(&mut lines, d, m)?);
    }
    let mut rows = Vec::with_capacity(m);
    for &d in &row_deg {
        rows.push(adjacency_line(&mut lines, d, n)?);
    }
    if let Ok((line, _)) = lines.next_ints() {
        return Err(AlistError::Malformed { line, detail: "trailing content after row lists".into() }.into());
    }

    for (c, row) in rows.iter().enumerate() {
        for &v in row {
            if !cols[v].contains(&c) {
                return Err(AlistError::Inconsistent { check: c + 1, var: v + 1 }.into());
            }
        }
    }
    // Row and column totals agree once every row entry is confirmed in the columns.
    if col_deg.iter().sum::<usize>() != row_deg.iter().sum::<usize>() {
        return Err(
            AlistError::Malformed { line: 3, detail: "column and row degree sums differ".into() }.into()
        );
    }
    ParityCheckMatrix::from_rows(n, rows)
}

/// Reads and parses an alist file; errors carry the file path.
pub fn read_alist(path: &Path) -> Result<ParityCheckMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_alist(&text).map_err(|e| match e {
        Error::Alist(a) => Error::format(path, a.to_string()),
        other => other,
    })
}

/// Canonical alist text: single spaces, zero padding to the maximum degree.
pub fn serialize_alist(pcm: &ParityCheckMatrix) -> String {
    let max_col = pcm.cols().iter().map(Vec::len).max().unwrap_or(0);
    let max_row = pcm.rows().iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    let join = |it: &mut dyn Iterator<Item = usize>| it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "{} {}", pcm.n(), pcm.m());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(&mut pcm.cols().iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut pcm.rows().iter().map(Vec::len)));
    for (lists, width) in [(pcm.cols(), max_col), (pcm.rows(), max_row)] {
        for l in lists {
            let padded = l.iter().map(|x| x + 1).chain(std::iter::repeat(0));
            let _ = writeln!(out, "{}", join(&mut padded.take(width)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::fixtures;

    #[test]
    fn hamming_fixture_shape() {
        let h = parse_alist(fixtures::HAMMING_7_4_ALIST).unwrap();
        assert_eq!((h.n(), h.m()), (7, 3));
        let weights: Vec<_> = h.rows().iter().map(Vec::len).collect();
        assert_eq!(weights, vec![4, 4, 4]);
        let expected = [[1, 0, 1, 0, 1, 0, 1], [0, 1, 1, 0, 0, 1, 1], [0, 0, 0, 1, 1, 1, 1]];
        for (c, row) in expected.iter().enumerate() {
            for (v, &b) in row.iter().enumerate() {
                assert_eq!(h.get(c, v), b == 1, "H[{c}][{v}]");
            }
        }
    }

    #[test]
    fn fixtures_are_canonical() {
        for name in fixtures::NAMES {
            let text = fixtures::by_name(name).unwrap();
            assert_eq!(serialize_alist(&parse_alist(text).unwrap()), text, "{name}");
        }
    }

    #[test]
    fn zero_index_is_out_of_range() {
        let bad = fixtures::REPETITION_3_ALIST.replacen("1 2\n2 3", "0 2\n2 3", 1);
        match parse_alist(&bad).unwrap_err() {
            Error::Alist(AlistError::IndexOutOfRange { index: 0, line, .. }) => {
                assert_eq!(line, 8)
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn large_index_is_out_of_range() {
        let bad = fixtures::REPETITION_3_ALIST.replacen("2 3\n", "2 4\n", 1);
        assert!(matches!(
            parse_alist(&bad).unwrap_err(),
            Error::Alist(AlistError::IndexOutOfRange { index: 4, max: 3, line: 9 })
        ));
    }

    #[test]
    fn degree_mismatch_reported() {
        // Column 2 declares degree 2 but lists one check.
        let bad = fixtures::REPETITION_3_ALIST.replacen("1 2\n2 0\n1 2", "1\n2 0\n1 2", 1);
        assert!(matches!(
            parse_alist(&bad).unwrap_err(),
            Error::Alist(AlistError::DegreeMismatch { line: 6, declared: 2, found: 1 })
        ));
    }

    #[test]
    fn malformed_header_reported() {
        assert!(matches!(
            parse_alist("3\n").unwrap_err(),
            Error::Alist(AlistError::MalformedHeader { line: 1, .. })
        ));
        assert!(matches!(
            parse_alist("3 x\n").unwrap_err(),
            Error::Alist(AlistError::MalformedHeader { line: 1, .. })
        ));
    }

    #[test]
    fn inconsistent_sections_reported() {
        let bad = fixtures::REPETITION_3_ALIST.replacen("1 2\n2 3\n", "1 3\n2 3\n", 1);
        assert!(parse_alist(&bad).is_err());
    }

    #[test]
    fn unpadded_lines_accepted() {
        let text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 3\n";
        let h = parse_alist(text).unwrap();
        assert_eq!(h, fixtures::repetition_3());
    }
}
