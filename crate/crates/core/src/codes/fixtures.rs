//! Embedded parity-check matrices for tests and desk-scale runs.

use super::{parse_alist, ParityCheckMatrix};

pub const HAMMING_7_4_ALIST: &str = include_str!("../../data/hamming_7_4.alist");
pub const REPETITION_3_ALIST: &str = include_str!("../../data/repetition_3.alist");
/// Cyclic BCH(15,7) matrix built from the parity polynomial x^7 + x^6 + x^4 + 1.
pub const BCH_15_7_ALIST: &str = include_str!("../../data/bch_15_7.alist");
/// Cyclic (not cycle-reduced) BCH(63,36) matrix.
pub const BCH_63_36_ALIST: &str = include_str!("../../data/bch_63_36.alist");
/// Cyclic (not cycle-reduced) BCH(63,45) matrix.
pub const BCH_63_45_ALIST: &str = include_str!("../../data/bch_63_45.alist");

/// Looks up an embedded fixture by name.
pub fn by_name(name: &str) -> Option<&'static str> {
    Some(match name {
        "hamming_7_4" => HAMMING_7_4_ALIST,
        "repetition_3" => REPETITION_3_ALIST,
        "bch_15_7" => BCH_15_7_ALIST,
        "bch_63_36" => BCH_63_36_ALIST,
        "bch_63_45" => BCH_63_45_ALIST,
        _ => return None,
    })
}

pub const NAMES: [&str; 5] = ["hamming_7_4", "repetition_3", "bch_15_7", "bch_63_36", "bch_63_45"];

/// The standard Hamming(7,4) matrix whose columns are 1..=7 in binary.
pub fn hamming_7_4() -> ParityCheckMatrix {
    parse_alist(HAMMING_7_4_ALIST).expect("embedded fixture")
}

/// Length-3 repetition code, `H = [[1,1,0],[0,1,1]]`.
pub fn repetition_3() -> ParityCheckMatrix {
    parse_alist(REPETITION_3_ALIST).expect("embedded fixture")
}

pub fn bch_15_7() -> ParityCheckMatrix {
    parse_alist(BCH_15_7_ALIST).expect("embedded fixture")
}

pub fn bch_63_36() -> ParityCheckMatrix {
    parse_alist(BCH_63_36_ALIST).expect("embedded fixture")
}

pub fn bch_63_45() -> ParityCheckMatrix {
    parse_alist(BCH_63_45_ALIST).expect("embedded fixture")
}
