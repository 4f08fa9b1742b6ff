//! Wavelets whose Fourier transform is piecewise constant with values in
//! `Q ∪ Q·√2`, and exact randomized checks of the orthonormality conditions.

use std::ops::Mul;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freqset::{dilation_window, BoundingAnnulus, FrequencySet, EXACT_DIM_CAP};
use crate::lattice::{validate_dilation, DilationMatrix, DEFAULT_MAX_EXPONENT};
use crate::matrix::Matrix;
use crate::rational::{self, serde_rational, Rational};
use crate::sampling::{
    point_in_box, point_in_cell, point_in_random_piece, sample_rng, CompiledSet, Location, PointRef, MAX_REDRAWS,
};
use crate::tiling::{point_translation_window, DilationShell, MAX_WITNESSES};

/// The real number `m · 2^(e/2)` with `e ∈ {0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ValueDoc", into = "ValueDoc")]
pub struct ExactValue {
    m: Rational,
    e: u8,
}

#[derive(Serialize, Deserialize)]
struct ValueDoc {
    #[serde(with = "serde_rational")]
    m: Rational,
    e: u8,
}

impl TryFrom<ValueDoc> for ExactValue {
    type Error = Error;

    fn try_from(d: ValueDoc) -> Result<Self> {
        ExactValue::new(d.m, d.e)
    }
}

impl From<ExactValue> for ValueDoc {
    fn from(v: ExactValue) -> Self {
        ValueDoc { m: v.m, e: v.e }
    }
}

impl ExactValue {
    pub fn new(m: Rational, e: u8) -> Result<Self> {
        if e > 1 {
            return Err(Error::Parse(format!("value exponent must be 0 or 1, got {e}")));
        }
        Ok(ExactValue { m, e })
    }

    pub fn rational(m: Rational) -> Self {
        ExactValue { m, e: 0 }
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    /// `1/√2 = (1/2)·√2`.
    pub fn inv_sqrt2() -> Self {
        ExactValue { m: rational::ratio(1, 2), e: 1 }
    }

    pub fn m(&self) -> &Rational {
        &self.m
    }

    pub fn e(&self) -> u8 {
        self.e
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn neg(&self) -> Self {
        ExactValue { m: -&self.m, e: self.e }
    }

    /// `|v|^2 = m^2 · 2^e`, always rational.
    pub fn square(&self) -> Rational {
        let s = &self.m * &self.m;
        if self.e == 1 {
            s * rational::int(2)
        } else {
            s
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.m) * if self.e == 1 { std::f64::consts::SQRT_2 } else { 1.0 }
    }
}

impl Mul for &ExactValue {
    type Output = ExactValue;

    fn mul(self, rhs: &ExactValue) -> ExactValue {
        let m = &self.m * &rhs.m;
        if self.e + rhs.e == 2 {
            ExactValue { m: m * rational::int(2), e: 0 }
        } else {
            ExactValue { m, e: self.e + rhs.e }
        }
    }
}

/// `a + b√2` with rational `a`, `b`; zero iff both vanish.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Buckets {
    #[serde(with = "serde_rational")]
    pub rational: Rational,
    #[serde(with = "serde_rational")]
    pub sqrt2: Rational,
}

impl Buckets {
    pub fn add(&mut self, v: &ExactValue) {
        if v.e == 0 {
            self.rational += &v.m;
        } else {
            self.sqrt2 += &v.m;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.sqrt2.is_zero()
    }
}

/// `ψ̂ = Σ values[i] · χ(pieces[i])` for a fixed dilation matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseWavelet {
    set: FrequencySet,
    values: Vec<ExactValue>,
    matrix: DilationMatrix,
}

impl PiecewiseWavelet {
    /// Rejects zero values and pieces whose interiors overlap.
    pub fn new(set: FrequencySet, values: Vec<ExactValue>, matrix: DilationMatrix) -> Result<Self> {
        if set.n() != matrix.n() {
            return Err(Error::DimensionMismatch { expected: matrix.n(), found: set.n() });
        }
        if values.len() != set.len() {
            return Err(Error::Parse(format!("{} values for {} pieces", values.len(), set.len())));
        }
        if let Some(i) = values.iter().position(ExactValue::is_zero) {
            return Err(Error::Parse(format!("value of piece {i} is zero")));
        }
        let pieces = set.pieces();
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                if pieces[i].interiors_meet(&pieces[j]) {
                    return Err(Error::OverlapDetected { first: format!("piece {i}"), second: format!("piece {j}") });
                }
            }
        }
        Ok(PiecewiseWavelet { set, values, matrix })
    }

    /// `χ_K`, the minimally supported frequency wavelet of a wavelet set.
    pub fn indicator(set: FrequencySet, matrix: DilationMatrix) -> Result<Self> {
        let values = vec![ExactValue::one(); set.len()];
        Self::new(set, values, matrix)
    }

    pub fn support(&self) -> &FrequencySet {
        &self.set
    }

    pub fn values(&self) -> &[ExactValue] {
        &self.values
    }

    pub fn matrix(&self) -> &DilationMatrix {
        &self.matrix
    }

    /// The same wavelet with every value multiplied by `c`.
    pub fn scaled(&self, c: &ExactValue) -> Result<Self> {
        let values = self.values.iter().map(|v| v * c).collect();
        Self::new(self.set.clone(), values, self.matrix.clone())
    }

    /// Parses the wavelet schema; `matrix` is used when the document has none
    /// and must agree with it when both are present.
    pub fn from_json(text: &str, matrix: Option<&DilationMatrix>) -> Result<Self> {
        let doc: WaveletDoc = serde_json::from_str(text)?;
        Self::from_doc(doc, matrix)
    }

    pub(crate) fn from_doc(doc: WaveletDoc, matrix: Option<&DilationMatrix>) -> Result<Self> {
        let m = match (doc.matrix, matrix) {
            (Some(rows), Some(m)) => {
                if rows != m.entries() {
                    return Err(Error::Parse("wavelet document names a different matrix".into()));
                }
                m.clone()
            }
            (Some(rows), None) => validate_dilation(&rows, DEFAULT_MAX_EXPONENT)?,
            (None, Some(m)) => m.clone(),
            (None, None) => return Err(Error::Parse("no dilation matrix given".into())),
        };
        Self::new(doc.set, doc.values, m)
    }

    pub fn to_doc(&self) -> WaveletDoc {
        WaveletDoc { matrix: Some(self.matrix.entries().to_vec()), set: self.set.clone(), values: self.values.clone() }
    }

    fn annulus(&self, what: &str) -> Result<BoundingAnnulus> {
        match self.set.bounding_annulus() {
            Some(a) if a.rho_min.is_positive() => Ok(a),
            _ => Err(Error::OriginInClosure { what: what.to_string() }),
        }
    }
}

/// JSON form: the frequency-set schema plus `values` aligned by piece and the matrix `A`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WaveletDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<i64>>>,
    #[serde(flatten)]
    pub set: FrequencySet,
    pub values: Vec<ExactValue>,
}

impl Serialize for PiecewiseWavelet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_doc().serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormCheck {
    pub ok: bool,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SumWitness {
    pub sample: usize,
    #[serde(with = "serde_rational::vec")]
    pub point: Vec<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<i64>>,
    pub sum: Buckets,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SumCheck {
    pub ok: bool,
    pub samples_used: usize,
    /// Number of exact sums evaluated (one per sample, or one per `(sample, q)` pair).
    pub sums_checked: usize,
    pub window: Option<(i64, i64)>,
    pub witnesses: Vec<SumWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WaveletReport {
    pub passed: bool,
    pub norm: NormCheck,
    pub dilation_sum: SumCheck,
    pub orthogonality: SumCheck,
    pub periodization: SumCheck,
}

/// `‖ψ‖² = Σ vol(piece) · |value|²` in 2π-units; must be exactly one.
pub fn check_norm(w: &PiecewiseWavelet) -> Result<NormCheck> {
    if w.set.n() > EXACT_DIM_CAP {
        return Err(Error::DimensionCap { n: w.set.n(), cap: EXACT_DIM_CAP });
    }
    let mut value = Rational::zero();
    for (p, v) in w.set.pieces().iter().zip(&w.values) {
        value += p.volume() * v.square();
    }
    Ok(NormCheck { ok: value.is_one(), value })
}

/// Value of `ψ̂` at a point; `None` on a piece boundary.
fn eval(w: &PiecewiseWavelet, compiled: &CompiledSet, x: &PointRef) -> Option<ExactValue> {
    match x.locate(compiled) {
        Location::Inside(i) => Some(w.values[i].clone()),
        Location::Boundary => None,
        Location::Outside => Some(ExactValue::zero()),
    }
}

enum Outcome {
    Unusable,
    Checked { sums: usize, failure: Option<SumWitness> },
}

fn summarize(outcomes: Vec<Outcome>, window: Option<(i64, i64)>) -> SumCheck {
    let mut samples_used = 0;
    let mut sums_checked = 0;
    let mut witnesses = Vec::new();
    for o in outcomes {
        if let Outcome::Checked { sums, failure } = o {
            samples_used += 1;
            sums_checked += sums;
            if let Some(f) = failure {
                if witnesses.len() < MAX_WITNESSES {
                    witnesses.push(f);
                }
            }
        }
    }
    SumCheck { ok: witnesses.is_empty() && samples_used > 0, samples_used, sums_checked, window, witnesses }
}

/// `Σ_j |ψ̂(B^j ξ)|² = 1` at sampled `ξ` in the reference tile.
pub fn check_dilation_sum(w: &PiecewiseWavelet, samples: usize, seed: u64) -> Result<SumCheck> {
    let annulus = w.annulus("the wavelet support")?;
    let shell = DilationShell::new(&w.matrix)?;
    let window = shell.window(&annulus, "the wavelet support")?;
    let compiled = CompiledSet::new(&w.set);
    let outcomes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            'draw: for _ in 0..MAX_REDRAWS {
                let Some(x) = shell.draw(&mut rng, i, &w.set) else { continue };
                let mut total = Rational::zero();
                for j in window.clone() {
                    match eval(w, &compiled, &shell.dilate(&x, j)) {
                        Some(v) => total += v.square(),
                        None => continue 'draw,
                    }
                }
                let failure = (!total.is_one()).then(|| SumWitness {
                    sample: i,
                    point: x.to_rational(),
                    q: None,
                    sum: Buckets { rational: total, sqrt2: Rational::zero() },
                });
                return Outcome::Checked { sums: 1, failure };
            }
            Outcome::Unusable
        })
        .collect();
    Ok(summarize(outcomes, Some((*window.start() as i64, *window.end() as i64))))
}

/// `Σ_k |ψ̂(ξ + k)|² = 1` at sampled `ξ` in the torus cell.
pub fn check_periodization(w: &PiecewiseWavelet, samples: usize, seed: u64) -> Result<SumCheck> {
    let n = w.set.n();
    let Some((lo, hi)) = w.set.bounding_box() else {
        return Ok(summarize(Vec::new(), None));
    };
    let compiled = CompiledSet::new(&w.set);
    let outcomes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            'draw: for _ in 0..MAX_REDRAWS {
                let x = if i % 2 == 0 {
                    point_in_cell(&mut rng, n)
                } else {
                    match point_in_random_piece(&mut rng, &w.set) {
                        Some((_, y)) => y,
                        None => continue,
                    }
                };
                let x = PointRef::Grid(x);
                let xr = x.to_rational();
                let mut total = Rational::zero();
                for k in point_translation_window(&xr, &lo, &hi) {
                    match eval(w, &compiled, &x.shifted(&k)) {
                        Some(v) => total += v.square(),
                        None => continue 'draw,
                    }
                }
                let failure = (!total.is_one()).then(|| SumWitness {
                    sample: i,
                    point: xr,
                    q: None,
                    sum: Buckets { rational: total, sqrt2: Rational::zero() },
                });
                return Outcome::Checked { sums: 1, failure };
            }
            Outcome::Unusable
        })
        .collect();
    Ok(summarize(outcomes, None))
}

/// `||B^(-j)||_inf` for `j = 0, 1, ...` up to the first `j` with `||B^(-j)|| ρ < 1/2`.
fn inverse_norms_until(m: &DilationMatrix, rho: &Rational) -> Vec<Rational> {
    let half = rational::ratio(1, 2);
    let mut out = vec![Rational::one()];
    let mut acc = Matrix::identity(m.n());
    while out.last().expect("nonempty") * rho >= half {
        acc = acc.mul(m.b_inv());
        out.push(acc.row_norm());
    }
    out
}

fn in_b_lattice(m: &DilationMatrix, q: &[i64]) -> bool {
    let qr: Vec<Rational> = q.iter().map(|&v| rational::int(v)).collect();
    m.b_inv().mul_vec(&qr).iter().all(rational::is_integer)
}

/// `Σ_{j≥0} ψ̂(B^j ξ) ψ̂(B^j (ξ + q)) = 0` for every `q ∉ B Z^n`.
///
/// `ξ = B^(-l) y` with `y` in the support box (even samples) or in a random
/// support piece (odd samples) and `l` uniform below the first level at which
/// `B^(-l) E` fits inside an open unit cube, beyond which no term survives.
pub fn check_tq_orthogonality(w: &PiecewiseWavelet, samples: usize, seed: u64) -> Result<SumCheck> {
    let annulus = w.annulus("the wavelet support")?;
    let m = &w.matrix;
    let shell = DilationShell::new(m)?;
    let (lo, hi) = w.set.bounding_box().expect("nonempty support");
    let norms = inverse_norms_until(m, &annulus.rho_max);
    let levels = norms.len() - 1;
    let compiled = CompiledSet::new(&w.set);

    let outcomes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            'draw: for _ in 0..MAX_REDRAWS {
                let l = rng.gen_range(0..=levels) as i32;
                let y = if i % 2 == 0 {
                    point_in_box(&mut rng, &lo, &hi)
                } else {
                    match point_in_random_piece(&mut rng, &w.set) {
                        Some((_, y)) => y,
                        None => continue,
                    }
                };
                let xi = shell.dilate(&PointRef::Grid(y), -l);
                let norm = xi.inf_norm();
                if norm.is_zero() {
                    continue;
                }
                let here = BoundingAnnulus { rho_min: norm.clone(), rho_max: norm };
                let Ok(window) = dilation_window(m, &here, &annulus, "sample") else { continue };
                // nonzero terms ψ̂(B^j ξ) for j ≥ 0
                let mut live = Vec::new();
                for j in (*window.start()).max(0)..=*window.end() {
                    match eval(w, &compiled, &shell.dilate(&xi, j)) {
                        Some(v) if v.is_zero() => {}
                        Some(v) => live.push((j, v)),
                        None => continue 'draw,
                    }
                }
                // q with ξ + q ∈ B^(-j) E ⊆ {‖·‖ ≤ ‖B^(-j)‖ ρ_max}
                let xr = xi.to_rational();
                let mut candidates = std::collections::BTreeSet::new();
                for (j, _) in &live {
                    let radius = if (*j as usize) < norms.len() {
                        &norms[*j as usize] * &annulus.rho_max
                    } else {
                        m.b_pow(-*j).row_norm() * &annulus.rho_max
                    };
                    let lo: Vec<Rational> = vec![-radius.clone(); xr.len()];
                    let hi: Vec<Rational> = vec![radius; xr.len()];
                    for q in point_translation_window(&xr, &lo, &hi) {
                        if !in_b_lattice(m, &q) {
                            candidates.insert(q);
                        }
                    }
                }
                let mut sums = 0;
                let mut failure = None;
                for q in candidates {
                    let shifted = xi.shifted(&q);
                    let mut total = Buckets::default();
                    for (j, v) in &live {
                        match eval(w, &compiled, &shell.dilate(&shifted, *j)) {
                            Some(u) => total.add(&(v * &u)),
                            None => continue 'draw,
                        }
                    }
                    sums += 1;
                    if failure.is_none() && !total.is_zero() {
                        failure = Some(SumWitness { sample: i, point: xr.clone(), q: Some(q), sum: total });
                    }
                }
                return Outcome::Checked { sums, failure };
            }
            Outcome::Unusable
        })
        .collect();
    Ok(summarize(outcomes, Some((0, levels as i64))))
}

/// All four checks; `passed` is their conjunction.
pub fn verify_all(w: &PiecewiseWavelet, samples: usize, seed: u64) -> Result<WaveletReport> {
    let norm = check_norm(w)?;
    let dilation_sum = check_dilation_sum(w, samples, seed)?;
    let orthogonality = check_tq_orthogonality(w, samples, seed)?;
    let periodization = check_periodization(w, samples, seed)?;
    let passed = norm.ok && dilation_sum.ok && orthogonality.ok && periodization.ok;
    Ok(WaveletReport { passed, norm, dilation_sum, orthogonality, periodization })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::{int, ratio};

    fn b2() -> DilationMatrix {
        catalog::matrix("dyadic1d").unwrap()
    }

    #[test]
    fn exact_value_algebra() {
        let h = ExactValue::inv_sqrt2();
        assert_eq!((&h * &h), ExactValue::rational(ratio(1, 2)));
        assert_eq!(h.square(), ratio(1, 2));
        assert_eq!((&h * &h.neg()).square(), ratio(1, 4));
        let grid: Vec<ExactValue> = (-3..=3)
            .flat_map(|p| (1..=3).flat_map(move |q| (0..=1).map(move |e| ExactValue::new(ratio(p, q), e).unwrap())))
            .collect();
        for a in &grid {
            for b in &grid {
                assert_eq!(a * b, b * a);
                assert_eq!((a * b).square(), a.square() * b.square());
                for c in grid.iter().step_by(5) {
                    assert_eq!(&(a * b) * c, a * &(b * c));
                }
            }
        }
        assert!(ExactValue::new(int(1), 2).is_err());
    }

    #[test]
    fn norm_examples() {
        let w = PiecewiseWavelet::indicator(catalog::shannon_set(), b2()).unwrap();
        assert_eq!(check_norm(&w).unwrap().value, int(1));
        let half = w.scaled(&ExactValue::rational(ratio(1, 2))).unwrap();
        let c = check_norm(&half).unwrap();
        assert!(!c.ok);
        assert_eq!(c.value, ratio(1, 4));
    }

    #[test]
    fn shannon_and_journe_pass() {
        for set in [catalog::shannon_set(), catalog::journe_set()] {
            let w = PiecewiseWavelet::indicator(set, b2()).unwrap();
            let r = verify_all(&w, 1000, 4).unwrap();
            assert!(r.passed, "{r:?}");
            assert!(r.orthogonality.sums_checked > 0);
        }
    }

    #[test]
    fn double_cover_fails_dilation_sum() {
        let w = PiecewiseWavelet::indicator(FrequencySet::intervals(&[(ratio(1, 2), ratio(3, 2))]), b2()).unwrap();
        let c = check_dilation_sum(&w, 1000, 2).unwrap();
        assert!(!c.ok);
        assert!(c.witnesses.iter().any(|x| x.sum.rational == int(2)));
    }

    #[test]
    fn half_volume_fails_periodization() {
        let w = PiecewiseWavelet::indicator(FrequencySet::intervals(&[(ratio(1, 2), int(1))]), b2()).unwrap();
        assert!(!check_periodization(&w, 500, 2).unwrap().ok);
        assert_eq!(check_norm(&w).unwrap().value, ratio(1, 2));
    }

    #[test]
    fn rejects_overlapping_pieces() {
        let s = FrequencySet::from_pieces(
            1,
            FrequencySet::intervals(&[(int(0), int(1)), (ratio(1, 2), int(2))]).into_pieces(),
        );
        assert!(matches!(PiecewiseWavelet::indicator(s, b2()), Err(Error::OverlapDetected { .. })));
    }

    #[test]
    fn json_round_trip() {
        let w =
            PiecewiseWavelet::indicator(catalog::journe_set(), b2()).unwrap().scaled(&ExactValue::inv_sqrt2()).unwrap();
        let text = serde_json::to_string(&w).unwrap();
        assert!(text.contains("\"e\":1"));
        let back = PiecewiseWavelet::from_json(&text, None).unwrap();
        assert_eq!(back, w);
        let other = catalog::matrix("triadic1d").unwrap();
        assert!(PiecewiseWavelet::from_json(&text, Some(&other)).is_err());
    }
}
