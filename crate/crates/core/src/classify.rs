//! Overlap sets `E(k) = E ∩ (E + k)` of a wavelet support and the class
//! `M_r` / `M_inf` they determine.
//!
//! Classification is exact: the `k` window is the bounding-box diameter of
//! the support and every overlap is decided by linear programming.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::freqset::{self_translation_window, translation_overlaps, FrequencySet};
use crate::lattice::{ord_b, DilationMatrix};
use crate::tiling::DEFAULT_SAMPLES;
use crate::wavelet::{verify_all, PiecewiseWavelet, WaveletReport};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Conflict {
    pub k: Vec<i64>,
    pub ord: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OverlapProfile {
    pub support: FrequencySet,
    pub conflicts: Vec<Conflict>,
    pub k_window: Vec<(i64, i64)>,
}

impl OverlapProfile {
    pub fn min_ord(&self) -> Option<u32> {
        self.conflicts.iter().map(|c| c.ord).min()
    }

    pub fn label(&self) -> ClassLabel {
        match self.min_ord() {
            Some(r) => ClassLabel::Finite(r),
            None => ClassLabel::Infinity,
        }
    }

    /// `ψ ∈ L_r` iff `E(k)` is null for every `k ∉ B^r Z^n`.
    pub fn in_lr(&self, r: u32) -> bool {
        self.conflicts.iter().all(|c| c.ord >= r)
    }

    /// True when `k` is a conflict exactly when `-k` is.
    pub fn is_symmetric(&self) -> bool {
        self.conflicts.iter().all(|c| {
            let neg: Vec<i64> = c.k.iter().map(|v| -v).collect();
            self.conflicts.iter().any(|d| d.k == neg && d.ord == c.ord)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassLabel {
    Finite(u32),
    Infinity,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::Finite(r) => write!(f, "M_{r}"),
            ClassLabel::Infinity => write!(f, "M_inf"),
        }
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Output document: `{"class": "M_r" | "M_inf", "conflicts": [{"k": [...], "ord": r}]}`.
#[derive(Clone, Debug, Serialize)]
pub struct LabelDoc {
    pub class: ClassLabel,
    pub conflicts: Vec<Conflict>,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub label: ClassLabel,
    pub profile: OverlapProfile,
    pub verification: WaveletReport,
}

impl Classification {
    pub fn to_doc(&self) -> LabelDoc {
        LabelDoc { class: self.label, conflicts: self.profile.conflicts.clone() }
    }
}

/// Every `k != 0` for which `E` and `E + k` overlap with positive measure.
pub fn overlap_profile_of(support: &FrequencySet, m: &DilationMatrix) -> Result<OverlapProfile> {
    let k_window = self_translation_window(support);
    let conflicts = translation_overlaps(support)?
        .into_iter()
        .map(|k| Ok(Conflict { ord: ord_b(m, &k)?, k }))
        .collect::<Result<Vec<_>>>()?;
    Ok(OverlapProfile { support: support.clone(), conflicts, k_window })
}

pub fn overlap_profile(w: &PiecewiseWavelet) -> Result<OverlapProfile> {
    overlap_profile_of(w.support(), w.matrix())
}

/// Verifies `w` at the given sampling budget, then labels it by its minimal conflict order.
pub fn classify_with(w: &PiecewiseWavelet, samples: usize, seed: u64) -> Result<Classification> {
    let verification = verify_all(w, samples, seed)?;
    if !verification.passed {
        let failed: Vec<&str> = [
            ("norm", verification.norm.ok),
            ("dilation-sum", verification.dilation_sum.ok),
            ("orthogonality", verification.orthogonality.ok),
            ("periodization", verification.periodization.ok),
        ]
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| *name)
        .collect();
        return Err(Error::NotAWavelet(format!("failed checks: {}", failed.join(", "))));
    }
    let profile = overlap_profile(w)?;
    Ok(Classification { label: profile.label(), profile, verification })
}

/// [`classify_with`] at the default budget of `10^4` samples and seed 0.
pub fn classify(w: &PiecewiseWavelet) -> Result<ClassLabel> {
    Ok(classify_with(w, DEFAULT_SAMPLES, 0)?.label)
}

pub fn is_in_lr(w: &PiecewiseWavelet, r: u32) -> Result<bool> {
    let c = classify_with(w, DEFAULT_SAMPLES, 0)?;
    Ok(c.profile.in_lr(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn msf_sets_have_no_conflicts() {
        let b2 = catalog::matrix("dyadic1d").unwrap();
        for set in [catalog::shannon_set(), catalog::journe_set()] {
            let w = PiecewiseWavelet::indicator(set, b2.clone()).unwrap();
            let c = classify_with(&w, 500, 0).unwrap();
            assert_eq!(c.label, ClassLabel::Infinity);
            assert!(c.profile.in_lr(7));
        }
    }

    #[test]
    fn label_strings() {
        assert_eq!(ClassLabel::Finite(2).to_string(), "M_2");
        assert_eq!(ClassLabel::Infinity.to_string(), "M_inf");
        let doc = LabelDoc { class: ClassLabel::Finite(1), conflicts: vec![Conflict { k: vec![2], ord: 1 }] };
        assert_eq!(serde_json::to_string(&doc).unwrap(), r#"{"class":"M_1","conflicts":[{"k":[2],"ord":1}]}"#);
    }

    #[test]
    fn non_wavelet_is_refused() {
        let b2 = catalog::matrix("dyadic1d").unwrap();
        let w = PiecewiseWavelet::indicator(
            FrequencySet::intervals(&[(crate::rational::ratio(1, 2), crate::rational::ratio(3, 2))]),
            b2,
        )
        .unwrap();
        assert!(matches!(classify_with(&w, 200, 0), Err(Error::NotAWavelet(_))));
    }

    #[test]
    fn profile_of_overlapping_support() {
        // a unit interval only touches its translates
        let b2 = catalog::matrix("dyadic1d").unwrap();
        let s = FrequencySet::intervals(&[(crate::rational::ratio(1, 2), crate::rational::ratio(3, 2))]);
        let p = overlap_profile_of(&s, &b2).unwrap();
        assert_eq!(p.conflicts, vec![]);
        let s = FrequencySet::intervals(&[(crate::rational::ratio(0, 1), crate::rational::ratio(5, 2))]);
        let p = overlap_profile_of(&s, &b2).unwrap();
        let ks: Vec<i64> = p.conflicts.iter().map(|c| c.k[0]).collect();
        assert_eq!(ks, vec![-2, -1, 1, 2]);
        assert_eq!(p.min_ord(), Some(0));
        assert!(p.is_symmetric());
    }
}
