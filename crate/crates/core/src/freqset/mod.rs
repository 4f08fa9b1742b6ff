//! Frequency-domain sets as finite unions of rational convex polytopes.
//!
//! Coordinates are in 2π-units: a stored point `x` stands for the frequency
//! `2πx`, so lattice translations are integer shifts and the torus cell is
//! the box `[-1/2, 1/2]^n`. Pieces are closed; overlaps and gaps of measure
//! zero are ignored throughout.

mod polytope;

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use polytope::{boxes_overlap, Halfspace, Membership, Polytope, EXACT_DIM_CAP};

use crate::error::{Error, Result};
use crate::lattice::DilationMatrix;
use crate::rational::{self, serde_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlap {
    Disjoint,
    PositiveMeasureOverlap,
}

/// l-infinity distances from the origin to a set and to the far side of its bounding box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingAnnulus {
    #[serde(with = "serde_rational")]
    pub rho_min: Rational,
    #[serde(with = "serde_rational")]
    pub rho_max: Rational,
}

impl BoundingAnnulus {
    pub fn of_point(x: &[Rational]) -> Self {
        let r = rational::max_abs(x);
        BoundingAnnulus { rho_min: r.clone(), rho_max: r }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencySet {
    n: usize,
    pieces: Vec<Polytope>,
}

impl FrequencySet {
    pub fn empty(n: usize) -> Self {
        FrequencySet { n, pieces: Vec::new() }
    }

    /// Pieces are taken as given; callers guarantee essential disjointness.
    pub fn from_pieces(n: usize, pieces: Vec<Polytope>) -> Self {
        debug_assert!(pieces.iter().all(|p| p.n() == n));
        FrequencySet { n, pieces }
    }

    /// `[-1/2, 1/2]^n`, the torus cell in 2π-units.
    pub fn unit_cell(n: usize) -> Self {
        let h = rational::ratio(1, 2);
        Self::cuboid(&vec![-h.clone(); n], &vec![h; n])
    }

    pub fn cuboid(lo: &[Rational], hi: &[Rational]) -> Self {
        FrequencySet { n: lo.len(), pieces: vec![Polytope::cuboid(lo, hi)] }
    }

    /// Union of one-dimensional closed intervals.
    pub fn intervals(iv: &[(Rational, Rational)]) -> Self {
        FrequencySet {
            n: 1,
            pieces: iv
                .iter()
                .map(|(a, b)| Polytope::cuboid(std::slice::from_ref(a), std::slice::from_ref(b)))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pieces(&self) -> &[Polytope] {
        &self.pieces
    }

    pub fn into_pieces(self) -> Vec<Polytope> {
        self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn push(&mut self, p: Polytope) {
        self.pieces.push(p);
    }

    pub fn extend(&mut self, other: FrequencySet) {
        self.pieces.extend(other.pieces);
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch { expected: self.n, found: n });
        }
        Ok(())
    }

    fn exact_cap(&self) -> Result<()> {
        if self.n > EXACT_DIM_CAP {
            return Err(Error::DimensionCap { n: self.n, cap: EXACT_DIM_CAP });
        }
        Ok(())
    }

    pub fn member(&self, x: &[Rational]) -> Result<Membership> {
        self.check_dim(x.len())?;
        let mut boundary = false;
        for p in &self.pieces {
            match p.member(x) {
                Membership::Inside => return Ok(Membership::Inside),
                Membership::Boundary => boundary = true,
                Membership::Outside => {}
            }
        }
        Ok(if boundary { Membership::Boundary } else { Membership::Outside })
    }

    pub fn volume(&self) -> Result<Rational> {
        self.exact_cap()?;
        Ok(self.pieces.iter().map(Polytope::volume).sum())
    }

    /// `B^j S`.
    pub fn dilate(&self, m: &DilationMatrix, j: i32) -> FrequencySet {
        if j == 0 {
            return self.clone();
        }
        let fwd = m.b_pow(j);
        let inv = m.b_pow(-j);
        FrequencySet { n: self.n, pieces: self.pieces.iter().map(|p| p.linear_image(&fwd, &inv)).collect() }
    }

    /// `S + k` in 2π-units (frequency shift by `2πk`).
    pub fn translate(&self, k: &[i64]) -> FrequencySet {
        let kq: Vec<Rational> = k.iter().map(|&v| rational::int(v)).collect();
        self.translate_by(&kq)
    }

    pub fn translate_by(&self, k: &[Rational]) -> FrequencySet {
        FrequencySet { n: self.n, pieces: self.pieces.iter().map(|p| p.translate(k)).collect() }
    }

    pub fn intersects(&self, other: &FrequencySet) -> Result<Overlap> {
        self.check_dim(other.n)?;
        let hit = self.pieces.iter().any(|p| other.pieces.iter().any(|q| p.interiors_meet(q)));
        Ok(if hit { Overlap::PositiveMeasureOverlap } else { Overlap::Disjoint })
    }

    pub fn intersection(&self, other: &FrequencySet) -> Result<FrequencySet> {
        self.check_dim(other.n)?;
        let mut out = Vec::new();
        for p in &self.pieces {
            for q in &other.pieces {
                if let Some(r) = p.intersection(q) {
                    out.push(r);
                }
            }
        }
        Ok(FrequencySet { n: self.n, pieces: out })
    }

    pub fn difference(&self, other: &FrequencySet) -> Result<FrequencySet> {
        self.check_dim(other.n)?;
        self.exact_cap()?;
        let mut current = self.pieces.clone();
        for q in &other.pieces {
            current = current.iter().flat_map(|p| p.difference(q)).collect();
        }
        Ok(FrequencySet { n: self.n, pieces: current })
    }

    /// `self ∪ other` with the pieces of `other` clipped against `self`.
    pub fn union(&self, other: &FrequencySet) -> Result<FrequencySet> {
        let extra = other.difference(self)?;
        let mut out = self.clone();
        out.pieces.extend(extra.pieces);
        Ok(out)
    }

    /// Appends pieces one at a time, clipping each against what is already present.
    fn accumulate(n: usize, pieces: impl IntoIterator<Item = Polytope>) -> Result<FrequencySet> {
        let mut acc = FrequencySet::empty(n);
        for p in pieces {
            let fresh = FrequencySet::from_pieces(n, vec![p]).difference(&acc)?;
            acc.pieces.extend(fresh.pieces);
        }
        Ok(acc)
    }

    pub fn bounding_box(&self) -> Option<(Vec<Rational>, Vec<Rational>)> {
        let mut it = self.pieces.iter().map(Polytope::bounding_box);
        let (mut lo, mut hi) = it.next()?;
        for (l, h) in it {
            for i in 0..self.n {
                if l[i] < lo[i] {
                    lo[i] = l[i].clone();
                }
                if h[i] > hi[i] {
                    hi[i] = h[i].clone();
                }
            }
        }
        Some((lo, hi))
    }

    /// `None` for the empty set.
    pub fn bounding_annulus(&self) -> Option<BoundingAnnulus> {
        let (lo, hi) = self.bounding_box()?;
        let rho_max = lo.iter().chain(hi.iter()).map(|x| x.abs()).max().unwrap_or_default();
        let rho_min = self.pieces.iter().map(Polytope::min_inf_norm).min().unwrap_or_default();
        Some(BoundingAnnulus { rho_min, rho_max })
    }

    /// `τ(S) = ⋃_k (S + k) ∩ [-1/2, 1/2]^n`.
    pub fn tau_projection(&self) -> Result<FrequencySet> {
        self.exact_cap()?;
        let cell = Polytope::cuboid(&vec![-rational::ratio(1, 2); self.n], &vec![rational::ratio(1, 2); self.n]);
        let mut parts = Vec::new();
        for p in &self.pieces {
            let (lo, hi) = p.bounding_box();
            for k in translation_window(&lo, &hi, &cell.bounding_box()) {
                let kq: Vec<Rational> = k.iter().map(|&v| rational::int(v)).collect();
                if let Some(r) = p.translate(&kq).intersection(&cell) {
                    parts.push(r);
                }
            }
        }
        Self::accumulate(self.n, parts)
    }

    /// `d(S) = ⋃_j B^j S ∩ D`, over the exact window implied by the two annuli.
    pub fn d_projection(&self, tile: &FrequencySet, m: &DilationMatrix) -> Result<FrequencySet> {
        self.check_dim(tile.n)?;
        self.exact_cap()?;
        if self.is_empty() || tile.is_empty() {
            return Ok(FrequencySet::empty(self.n));
        }
        let src = self.bounding_annulus().expect("nonempty");
        let dst = tile.bounding_annulus().expect("nonempty");
        let window = dilation_window(m, &src, &dst, "d-projection")?;
        let mut parts = Vec::new();
        for j in window {
            let image = self.dilate(m, j);
            parts.extend(image.intersection(tile)?.pieces);
        }
        Self::accumulate(self.n, parts)
    }
}

/// Half-widths of the `k` window outside which `S` and `S + k` can only touch.
pub fn self_translation_window(s: &FrequencySet) -> Vec<(i64, i64)> {
    let Some((lo, hi)) = s.bounding_box() else {
        return Vec::new();
    };
    lo.iter()
        .zip(&hi)
        .map(|(l, h)| {
            let d = rational::ceil(&(h - l)).to_i64().expect("window fits") - 1;
            (-d, d)
        })
        .collect()
}

/// Every `k != 0` with `S ∩ (S + k)` of positive measure, in window order.
pub fn translation_overlaps(s: &FrequencySet) -> Result<Vec<Vec<i64>>> {
    let window = self_translation_window(s);
    if window.is_empty() {
        return Ok(Vec::new());
    }
    let hits: Vec<Result<Option<Vec<i64>>>> = lattice_box(&window)
        .into_par_iter()
        .filter(|k| k.iter().any(|&v| v != 0))
        .map(|k| Ok((s.intersects(&s.translate(&k))? == Overlap::PositiveMeasureOverlap).then_some(k)))
        .collect();
    hits.into_iter().filter_map(Result::transpose).collect()
}

/// Every `j != 0` with `S ∩ B^j S` of positive measure.
pub fn dilation_overlaps(s: &FrequencySet, m: &DilationMatrix) -> Result<Vec<i32>> {
    let Some(annulus) = s.bounding_annulus() else {
        return Ok(Vec::new());
    };
    let window = dilation_window(m, &annulus, &annulus, "the set")?;
    let mut out = Vec::new();
    for j in window {
        if j != 0 && s.intersects(&s.dilate(m, j))? == Overlap::PositiveMeasureOverlap {
            out.push(j);
        }
    }
    Ok(out)
}

/// Integer shifts `k` for which the box `[lo, hi] + k` can meet `target` with positive measure.
pub fn translation_window(lo: &[Rational], hi: &[Rational], target: &(Vec<Rational>, Vec<Rational>)) -> Vec<Vec<i64>> {
    let ranges: Vec<(i64, i64)> = (0..lo.len())
        .map(|i| {
            // lo + k < t_hi and t_lo < hi + k
            let kmin = rational::floor(&(&target.0[i] - &hi[i])) + BigInt::from(1);
            let kmax = rational::ceil(&(&target.1[i] - &lo[i])) - BigInt::from(1);
            (kmin.to_i64().expect("window fits"), kmax.to_i64().expect("window fits"))
        })
        .collect();
    lattice_box(&ranges)
}

/// All integer vectors in the product of inclusive ranges, first coordinate fastest.
pub fn lattice_box(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    if ranges.iter().any(|(a, b)| a > b) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(cur.clone());
        let mut i = 0;
        loop {
            if i == ranges.len() {
                return out;
            }
            if cur[i] < ranges[i].1 {
                cur[i] += 1;
                break;
            }
            cur[i] = ranges[i].0;
            i += 1;
        }
    }
}

/// All `j` for which `B^j` maps the annulus `src` onto something that can meet `dst`.
///
/// With `c = ||B^(-m)||_inf < 1` and `N = max_{s<m} ||B^(-s)||_inf`, for `j = qm + s >= 0`
/// we have `||B^j x|| >= ||x|| / (c^q N)`, and for `j = -(qm + s) <= 0`
/// `||B^j x|| <= c^q N ||x||`.
pub fn dilation_window(
    m: &DilationMatrix,
    src: &BoundingAnnulus,
    dst: &BoundingAnnulus,
    what: &str,
) -> Result<RangeInclusive<i32>> {
    if !src.rho_min.is_positive() || !dst.rho_min.is_positive() {
        return Err(Error::OriginInClosure { what: what.to_string() });
    }
    let c = m.contraction_norm();
    let slack = m.inverse_power_bound();
    let step = m.contraction_exponent() as i32;

    let mut q_up = 0i32;
    let mut factor = slack.clone();
    while src.rho_min <= &dst.rho_max * &factor {
        q_up += 1;
        factor *= c;
    }
    let mut q_down = 0i32;
    let mut factor = slack;
    while &factor * &src.rho_max >= dst.rho_min {
        q_down += 1;
        factor *= c;
    }
    Ok((1 - q_down * step)..=(q_up * step - 1))
}

// ---------------------------------------------------------------------------
// JSON schema: {"n": int, "pieces": [{"halfspaces": [{"a": ["p/q"], "b": "p/q"}]}]}

#[derive(Serialize, Deserialize)]
struct HalfspaceDoc {
    #[serde(with = "serde_rational::vec")]
    a: Vec<Rational>,
    #[serde(with = "serde_rational")]
    b: Rational,
}

#[derive(Serialize, Deserialize)]
struct PieceDoc {
    halfspaces: Vec<HalfspaceDoc>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct SetDoc {
    n: usize,
    pieces: Vec<PieceDoc>,
}

impl From<&FrequencySet> for SetDoc {
    fn from(s: &FrequencySet) -> Self {
        SetDoc {
            n: s.n,
            pieces: s
                .pieces
                .iter()
                .map(|p| PieceDoc {
                    halfspaces: p
                        .halfspaces()
                        .iter()
                        .map(|h| HalfspaceDoc { a: h.a.clone(), b: h.b.clone() })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<SetDoc> for FrequencySet {
    type Error = Error;

    fn try_from(doc: SetDoc) -> Result<Self> {
        if doc.n == 0 {
            return Err(Error::Parse("dimension must be positive".into()));
        }
        let mut pieces = Vec::with_capacity(doc.pieces.len());
        for (idx, piece) in doc.pieces.into_iter().enumerate() {
            let mut hs = Vec::with_capacity(piece.halfspaces.len());
            for h in piece.halfspaces {
                if h.a.len() != doc.n {
                    return Err(Error::DimensionMismatch { expected: doc.n, found: h.a.len() });
                }
                hs.push(Halfspace::new(h.a, h.b));
            }
            let p = Polytope::new(doc.n, hs);
            if !p.is_bounded() {
                return Err(Error::Unbounded);
            }
            if !p.has_interior() {
                return Err(Error::Parse(format!("piece {idx} has empty interior")));
            }
            pieces.push(p);
        }
        Ok(FrequencySet { n: doc.n, pieces })
    }
}

impl Serialize for FrequencySet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SetDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrequencySet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = SetDoc::deserialize(d)?;
        FrequencySet::try_from(doc).map_err(serde::de::Error::custom)
    }
}

/// `x` is strictly inside the torus cell `[-1/2, 1/2)^n` after reduction.
pub fn reduce_to_cell(x: &[Rational]) -> (Vec<Rational>, Vec<i64>) {
    let half = rational::ratio(1, 2);
    let mut out = Vec::with_capacity(x.len());
    let mut shift = Vec::with_capacity(x.len());
    for v in x {
        let k = rational::floor(&(v + &half));
        let kq = Rational::from_integer(k.clone());
        out.push(v - kq);
        shift.push(-k.to_i64().expect("shift fits"));
    }
    (out, shift)
}
