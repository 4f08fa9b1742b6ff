//! Built-in dilation matrices and fixture sets.

use crate::error::{Error, Result};
use crate::freqset::FrequencySet;
use crate::lattice::{validate_dilation, DilationMatrix, DEFAULT_MAX_EXPONENT};
use crate::rational::ratio;

pub const MATRIX_NAMES: [&str; 4] = ["dyadic1d", "triadic1d", "quincunx", "dyadic2d"];
pub const SET_NAMES: [&str; 2] = ["shannon-set", "journe-set"];

pub fn matrix_entries(name: &str) -> Option<Vec<Vec<i64>>> {
    Some(match name {
        "dyadic1d" => vec![vec![2]],
        "triadic1d" => vec![vec![3]],
        "quincunx" => vec![vec![1, 1], vec![1, -1]],
        "dyadic2d" => vec![vec![2, 0], vec![0, 2]],
        _ => return None,
    })
}

pub fn matrix(name: &str) -> Result<DilationMatrix> {
    let rows = matrix_entries(name).ok_or_else(|| Error::Parse(format!("unknown catalog matrix {name:?}")))?;
    validate_dilation(&rows, DEFAULT_MAX_EXPONENT)
}

pub fn all_matrices() -> Vec<(&'static str, DilationMatrix)> {
    MATRIX_NAMES.iter().map(|&n| (n, matrix(n).expect("catalog matrices are valid"))).collect()
}

/// `[-1, -1/2] ∪ [1/2, 1]` (2π-units), the dyadic Shannon wavelet set.
pub fn shannon_set() -> FrequencySet {
    FrequencySet::intervals(&[(ratio(-1, 1), ratio(-1, 2)), (ratio(1, 2), ratio(1, 1))])
}

/// `±([2/7, 1/2] ∪ [2, 16/7])` (2π-units), the dyadic Journé wavelet set.
pub fn journe_set() -> FrequencySet {
    FrequencySet::intervals(&[
        (ratio(-16, 7), ratio(-2, 1)),
        (ratio(-1, 2), ratio(-2, 7)),
        (ratio(2, 7), ratio(1, 2)),
        (ratio(2, 1), ratio(16, 7)),
    ])
}

/// `±([a, 1/2] ∪ [2^r, 2^r + a])` with `a = 2^r / (2^(r+2) - 1)`, a dyadic
/// wavelet set for every `r`; `r = 1` is the Journé set.
///
/// `a` is the fixed point of `x ↦ 2^(-r-2) (x + 2^r)`, so `2^(r+2) [1/4, a]`
/// lands on `[0, a]` modulo 1 and completes `[a, 1/2]` to `[0, 1/2]`.
pub fn journe_family(r: u32) -> FrequencySet {
    let k = 1i64 << r;
    let a = ratio(k, 4 * k - 1);
    let half = ratio(1, 2);
    let kq = ratio(k, 1);
    FrequencySet::intervals(&[
        (-(&kq + &a), -kq.clone()),
        (-half.clone(), -a.clone()),
        (a.clone(), half),
        (kq.clone(), kq + a),
    ])
}

/// Fixture sets with the catalog matrix they are wavelet sets for.
pub fn set(name: &str) -> Option<(FrequencySet, &'static str)> {
    match name {
        "shannon-set" => Some((shannon_set(), "dyadic1d")),
        "journe-set" => Some((journe_set(), "dyadic1d")),
        _ => None,
    }
}
