//! Seeds, their completion to a wavelet set, and the wavelets `ψ_r` built
//! on top of them.
//!
//! The seed is `S = I ∪ (B^(-p) I + k)` with `I` a small cube around a random
//! rational centre `y`. Completion grows `S` by relocating pieces of the
//! unfilled part of the torus cell into the unfilled part of the dilation
//! tile `D` until both are exhausted.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog;
use crate::error::{Error, Result};
use crate::freqset::{
    dilation_overlaps, lattice_box, translation_overlaps, translation_window, FrequencySet, Overlap, Polytope,
};
use crate::lattice::{choose_kr, ord_b, DilationMatrix};
use crate::matrix::Matrix;
use crate::rational::{self, serde_rational, Rational};
use crate::tiling::build_dilation_tile;
use crate::wavelet::{ExactValue, PiecewiseWavelet};

pub const MAX_DRAWS: u32 = 256;
pub const MAX_HALVINGS: u32 = 40;
pub const DEFAULT_MAX_PIECES: usize = 4096;
pub const MAX_PIECES_ENV: &str = "LATTICEWAVE_MAX_PIECES";

/// Reads the piece cap from the environment, falling back to the default.
pub fn max_pieces_from_env() -> usize {
    std::env::var(MAX_PIECES_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_PIECES)
}

/// Fixed points of the affine maps used to place the seed.
#[derive(Clone, Debug)]
pub struct FixedPoints {
    /// Columns generate the lattice `(B^(-p) - I)^(-1) Z^n`.
    pub lattice_basis: Matrix,
    /// `(j, (B^(-j) - I)^(-1) k)` for each requested `j != 0`.
    pub g_points: Vec<(i32, Vec<Rational>)>,
    /// Accumulation points `0` and `-k` of the `g` points.
    pub limit_points: Vec<Vec<Rational>>,
}

fn shift_inverse(m: &DilationMatrix, j: i32) -> Result<Matrix> {
    m.b_pow(-j).sub(&Matrix::identity(m.n())).inverse().ok_or(Error::SingularShift { j })
}

pub fn fixed_point_set(
    m: &DilationMatrix,
    k: &[i64],
    p: i32,
    j_window: impl IntoIterator<Item = i32>,
) -> Result<FixedPoints> {
    if p == 0 {
        return Err(Error::InvalidSeed("p must be nonzero".into()));
    }
    if k.len() != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), found: k.len() });
    }
    let kq: Vec<Rational> = k.iter().map(|&v| rational::int(v)).collect();
    let lattice_basis = shift_inverse(m, p)?;
    let mut g_points = Vec::new();
    for j in j_window {
        if j != 0 {
            g_points.push((j, shift_inverse(m, j)?.mul_vec(&kq)));
        }
    }
    let limit_points = vec![vec![Rational::zero(); m.n()], kq.iter().map(|v| -v).collect()];
    Ok(FixedPoints { lattice_basis, g_points, limit_points })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeedSpec {
    pub r: u32,
    pub k_r: Vec<i64>,
    pub p: i32,
    #[serde(with = "serde_rational::vec")]
    pub y: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub epsilon: Rational,
    #[serde(rename = "I")]
    pub i: FrequencySet,
}

impl SeedSpec {
    pub fn new(m: &DilationMatrix, r: u32, k_r: Vec<i64>, p: i32, y: Vec<Rational>, epsilon: Rational) -> Result<Self> {
        if !epsilon.is_positive() {
            return Err(Error::InvalidSeed("epsilon must be positive".into()));
        }
        if p == 0 {
            return Err(Error::InvalidSeed("p must be nonzero".into()));
        }
        if y.len() != m.n() || k_r.len() != m.n() {
            return Err(Error::DimensionMismatch { expected: m.n(), found: y.len().max(k_r.len()) });
        }
        let i = FrequencySet::from_pieces(m.n(), vec![Polytope::cube(&y, &epsilon)]);
        Ok(SeedSpec { r, k_r, p, y, epsilon, i })
    }

    /// `S = I ∪ (B^(-p) I + k)`.
    pub fn seed_set(&self, m: &DilationMatrix) -> Result<FrequencySet> {
        self.i.union(&self.i.dilate(m, -self.p).translate(&self.k_r))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InteriorBox {
    #[serde(with = "serde_rational::vec")]
    pub center: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub half_width: Rational,
}

/// Per-condition verdicts of a seed, with explicit witnesses where they exist.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeedCheck {
    pub ord_ok: bool,
    pub tau_disjoint: bool,
    pub d_disjoint: bool,
    pub translation_disjoint: bool,
    pub dilation_disjoint: bool,
    pub origin_clear: bool,
    #[serde(with = "serde_rational::option")]
    pub origin_epsilon: Option<Rational>,
    pub tile_has_room: bool,
    pub tile_room: Option<InteriorBox>,
    pub translation_conflicts: Vec<Vec<i64>>,
    pub dilation_conflicts: Vec<i32>,
}

impl SeedCheck {
    pub fn passed(&self) -> bool {
        self.ord_ok
            && self.tau_disjoint
            && self.d_disjoint
            && self.translation_disjoint
            && self.dilation_disjoint
            && self.origin_clear
            && self.tile_has_room
    }
}

/// Largest cube inside a polytope around its LP centre.
fn interior_box(p: &Polytope) -> Option<InteriorBox> {
    let (x, _) = p.interior_witness()?;
    let h = p
        .halfspaces()
        .iter()
        .map(|h| {
            let l1: Rational = h.a.iter().map(|v| v.abs()).sum();
            (&h.b - rational::dot(&h.a, &x)) / l1
        })
        .min()?;
    h.is_positive().then_some(InteriorBox { center: x, half_width: h })
}

/// Evaluates the seed conditions with exact finite windows against the tile `d`.
pub fn check_seed_against(m: &DilationMatrix, seed: &SeedSpec, d: &FrequencySet) -> Result<SeedCheck> {
    let ord_ok = ord_b(m, &seed.k_r).map(|o| o == seed.r).unwrap_or(false);
    let i = &seed.i;
    let tau_disjoint = i.tau_projection()?.intersects(&i.dilate(m, -seed.p).tau_projection()?)? == Overlap::Disjoint;

    let kq: Vec<Rational> = seed.k_r.iter().map(|&v| rational::int(v)).collect();
    let shifted = i.translate_by(&m.apply_b(seed.p, &kq));
    let d_disjoint = match (i.d_projection(d, m), shifted.d_projection(d, m)) {
        (Ok(a), Ok(b)) => a.intersects(&b)? == Overlap::Disjoint,
        _ => false,
    };

    let s = seed.seed_set(m)?;
    let translation_conflicts = translation_overlaps(&s)?;
    let (dilation_disjoint, dilation_conflicts) = match dilation_overlaps(&s, m) {
        Ok(v) => (v.is_empty(), v),
        Err(Error::OriginInClosure { .. }) => (false, Vec::new()),
        Err(e) => return Err(e),
    };

    let tau_s = s.tau_projection()?;
    let rho = tau_s.bounding_annulus().expect("seed is nonempty").rho_min;
    let origin_epsilon = rho.is_positive().then(|| &rho / rational::int(2));

    let tile_room = match s.d_projection(d, m) {
        Ok(ds) => {
            d.difference(&ds)?.pieces().iter().filter_map(interior_box).max_by(|a, b| a.half_width.cmp(&b.half_width))
        }
        Err(_) => None,
    };

    Ok(SeedCheck {
        ord_ok,
        tau_disjoint,
        d_disjoint,
        translation_disjoint: translation_conflicts.is_empty(),
        dilation_disjoint,
        origin_clear: origin_epsilon.is_some(),
        origin_epsilon,
        tile_has_room: tile_room.is_some(),
        tile_room,
        translation_conflicts,
        dilation_conflicts,
    })
}

pub fn check_seed(m: &DilationMatrix, seed: &SeedSpec) -> Result<SeedCheck> {
    check_seed_against(m, seed, &build_dilation_tile(m)?)
}

/// Integer points `z` with `M z` in the cube of radius `radius` around `y`.
fn lattice_points_near(basis: &Matrix, y: &[Rational], radius: &Rational) -> Vec<Vec<Rational>> {
    let inv = basis.inverse().expect("lattice basis is invertible");
    let c = inv.mul_vec(y);
    let ranges: Vec<(i64, i64)> = (0..y.len())
        .map(|i| {
            let w: Rational = inv.row(i).iter().map(|v| v.abs()).sum::<Rational>() * radius;
            (
                rational::ceil(&(&c[i] - &w)).to_i64().expect("window fits"),
                rational::floor(&(&c[i] + &w)).to_i64().expect("window fits"),
            )
        })
        .collect();
    lattice_box(&ranges)
        .into_iter()
        .map(|z| basis.mul_vec(&z.iter().map(|&v| rational::int(v)).collect::<Vec<_>>()))
        .collect()
}

/// Excluded points within `radius` of `y`: fixed-point lattice, `g` points,
/// their limits, `Z^n` and `B^p Z^n`.
fn excluded_near(
    m: &DilationMatrix,
    fp: &FixedPoints,
    p: i32,
    y: &[Rational],
    radius: &Rational,
) -> Vec<Vec<Rational>> {
    let n = m.n();
    let mut out = lattice_points_near(&fp.lattice_basis, y, radius);
    out.extend(lattice_points_near(&Matrix::identity(n), y, radius));
    out.extend(lattice_points_near(&m.b_pow(p), y, radius));
    out.extend(fp.g_points.iter().map(|(_, x)| x.clone()));
    out.extend(fp.limit_points.iter().cloned());
    out
}

fn inf_dist(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or_default()
}

/// Largest power of two not exceeding `x > 0`.
fn dyadic_floor(x: &Rational) -> Rational {
    let mut e = rational::ratio(1, 8);
    while &e > x {
        e /= rational::int(2);
    }
    e
}

/// A wavelet set known to contain seeds for the shift `k`, when one is needed.
///
/// For `k ∈ B Z^n` the seed puts `B^(-2) I` and `B^(-1)(B^(-1) I + k)` in one
/// translation class, so the dimension function of any completion exceeds 1
/// there. A completion whose breakpoints are all `B`-adic has dimension
/// function identically 1, so relocation starting from a `B`-adic seed never
/// closes up. The reference set supplies the periodic breakpoints instead.
pub fn reference_set(m: &DilationMatrix, k: &[i64]) -> Option<FrequencySet> {
    if m.entries() != [vec![2]] {
        return None;
    }
    let r = ord_b(m, k).ok()?;
    (r >= 1 && k[0].unsigned_abs() == 1u64 << r).then(|| catalog::journe_family(r))
}

fn inside(s: &FrequencySet, g: &FrequencySet) -> Result<bool> {
    Ok(s.difference(g)?.volume()?.is_zero())
}

/// Draws `y` in the annulus `1/4 <= ||y||_inf <= 3/4` on the grid `Z^n / 1024`.
/// `ε` starts at the largest power of two below `min(dist / 2, 1/8)` and is
/// halved until the seed passes. When [`reference_set`] has an entry for
/// `k_r` the seed must also lie inside it.
pub fn build_seed(m: &DilationMatrix, r: u32, p: i32, rng_seed: u64) -> Result<SeedSpec> {
    if p == 0 {
        return Err(Error::InvalidSeed("p must be nonzero".into()));
    }
    let n = m.n();
    let k = choose_kr(m, r);
    let fp = fixed_point_set(m, &k, p, (-64..=64).filter(|&j| j != 0))?;
    let tile = build_dilation_tile(m)?;
    let guide = reference_set(m, &k);
    let quarter = rational::ratio(1, 4);
    let three_quarters = rational::ratio(3, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    for _ in 0..MAX_DRAWS {
        let y: Vec<Rational> = (0..n).map(|_| rational::ratio(rng.gen_range(-768..=768), 1024)).collect();
        let norm = rational::max_abs(&y);
        if norm < quarter || norm > three_quarters {
            continue;
        }
        let near = excluded_near(m, &fp, p, &y, &quarter);
        let dist = near.iter().map(|x| inf_dist(x, &y)).min().unwrap_or_else(|| quarter.clone());
        if dist.is_zero() {
            continue;
        }
        let mut eps = dyadic_floor(&(&dist / rational::int(2)).min(rational::ratio(1, 8)));
        for _ in 0..MAX_HALVINGS {
            let seed = SeedSpec::new(m, r, k.clone(), p, y.clone(), eps.clone())?;
            let fits = match &guide {
                Some(g) => inside(&seed.seed_set(m)?, g)?,
                None => true,
            };
            if fits && check_seed_against(m, &seed, &tile)?.passed() {
                return Ok(seed);
            }
            eps /= rational::int(2);
        }
    }
    Err(Error::SearchExhausted { draws: MAX_DRAWS })
}

#[derive(Clone, Debug)]
pub struct CompletionConfig {
    pub tolerance: Rational,
    pub max_iter: u32,
    pub max_pieces: usize,
    /// Relocations landing inside this set are preferred.
    pub guide: Option<FrequencySet>,
    /// Whether a stalled greedy pass falls back to exchange steps.
    pub exchange: bool,
}

impl CompletionConfig {
    pub fn new(tolerance: Rational, max_iter: u32) -> Self {
        CompletionConfig { tolerance, max_iter, max_pieces: max_pieces_from_env(), guide: None, exchange: true }
    }

    pub fn with_guide(mut self, guide: Option<FrequencySet>) -> Self {
        self.guide = guide;
        self
    }

    pub fn with_exchange(mut self, exchange: bool) -> Self {
        self.exchange = exchange;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualStep {
    #[serde(with = "serde_rational")]
    pub translation: Rational,
    #[serde(with = "serde_rational")]
    pub dilation: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Completion {
    #[serde(rename = "W")]
    pub w: FrequencySet,
    #[serde(with = "serde_rational")]
    pub residual_translation: Rational,
    #[serde(with = "serde_rational")]
    pub residual_dilation: Rational,
    pub iterations: u32,
    pub exact: bool,
    pub history: Vec<ResidualStep>,
}

/// Level search radius for relocations: `j ∈ [-L, L]`.
fn level_radius(m: &DilationMatrix) -> i32 {
    4 * m.contraction_exponent() as i32 + 4
}

/// Levels ordered by how well `a^(-j)` matches the mass ratio `rho = vol(V) / vol(U)`,
/// so relocating `U` at that level keeps the two residuals in balance.
fn level_order(a: u64, rho: &Rational, radius: i32) -> Vec<i32> {
    let a = rational::int(a as i64);
    let mut levels: Vec<(Rational, i32)> = (-radius..=radius)
        .map(|j| {
            let s = rational::pow_i(&a, -j);
            let mismatch = (&s / rho).max(rho / &s);
            (mismatch, j)
        })
        .collect();
    levels.sort();
    levels.into_iter().map(|(_, j)| j).collect()
}

/// `vol(d(W))` and `Σ_j vol(B^j W ∩ D)`; they agree iff the dilates of `W` are disjoint.
fn dilation_masses(w: &FrequencySet, d: &FrequencySet, m: &DilationMatrix) -> Result<(Rational, Rational)> {
    if w.is_empty() {
        return Ok((Rational::zero(), Rational::zero()));
    }
    let src = w.bounding_annulus().expect("nonempty");
    let dst = d.bounding_annulus().expect("nonempty");
    let mut raw = Rational::zero();
    for j in crate::freqset::dilation_window(m, &src, &dst, "the partial wavelet set")? {
        raw += w.dilate(m, j).intersection(d)?.volume()?;
    }
    Ok((w.d_projection(d, m)?.volume()?, raw))
}

/// Recomputes both projections of `W` from scratch and checks them against
/// the residual bookkeeping.
fn check_invariants(
    m: &DilationMatrix,
    w: &FrequencySet,
    d: &FrequencySet,
    vol_d: &Rational,
    residual_u: &Rational,
    residual_v: &Rational,
) -> Result<()> {
    let vol_w = w.volume()?;
    let tau = w.tau_projection()?.volume()?;
    if tau != vol_w {
        return Err(Error::InvariantViolated(format!(
            "translates overlap: vol(W) = {}, vol(tau(W)) = {}",
            rational::format(&vol_w),
            rational::format(&tau)
        )));
    }
    let (dv, raw) = dilation_masses(w, d, m)?;
    if dv != raw {
        return Err(Error::InvariantViolated(format!(
            "dilates overlap: vol(d(W)) = {}, summed = {}",
            rational::format(&dv),
            rational::format(&raw)
        )));
    }
    if &(Rational::one() - &tau) != residual_u || &(vol_d - &dv) != residual_v {
        return Err(Error::InvariantViolated("residual bookkeeping disagrees with recomputed projections".into()));
    }
    Ok(())
}

fn check_pieces(limit: usize, sets: &[&FrequencySet]) -> Result<()> {
    let count = sets.iter().map(|s| s.len()).max().unwrap_or(0);
    if count > limit {
        return Err(Error::PieceLimit { count, limit });
    }
    Ok(())
}

/// Extends `s` to a wavelet set.
///
/// Each iteration picks the level `j` whose scale best matches the ratio of
/// the two residual masses and, for every `k` in window order, adjoins
/// `Q = (U + k) ∩ B^j V`, where `U` is the unfilled part of the cell and `V`
/// the unfilled part of `D`. With a guide, `Q` is first clipped to it and
/// the unclipped pass only runs when no level makes guided progress. The
/// loop runs until both residuals vanish; a run that cannot continue is
/// still returned when both residuals are below `tolerance`, flagged inexact.
pub fn complete_to_wavelet_set(m: &DilationMatrix, s: &FrequencySet, config: &CompletionConfig) -> Result<Completion> {
    let n = m.n();
    if s.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: s.n() });
    }
    let d = build_dilation_tile(m)?;
    let vol_d = d.volume()?;
    let cell = FrequencySet::unit_cell(n);
    let mut w = s.clone();
    let mut u = cell.difference(&w.tau_projection()?)?;
    let mut v = if w.is_empty() { d.clone() } else { d.difference(&w.d_projection(&d, m)?)? };
    let mut ru = u.volume()?;
    let mut rv = v.volume()?;
    check_invariants(m, &w, &d, &vol_d, &ru, &rv)?;
    let mut history = vec![ResidualStep { translation: ru.clone(), dilation: rv.clone() }];
    let radius = level_radius(m);
    let mut iterations = 0;

    let finish = |w: FrequencySet, ru: Rational, rv: Rational, iterations, history| Completion {
        w,
        exact: ru.is_zero() && rv.is_zero(),
        residual_translation: ru,
        residual_dilation: rv,
        iterations,
        history,
    };
    let within = |ru: &Rational, rv: &Rational| ru < &config.tolerance && rv < &config.tolerance;

    loop {
        if ru.is_zero() && rv.is_zero() {
            return Ok(finish(w, ru, rv, iterations, history));
        }
        if iterations >= config.max_iter {
            if within(&ru, &rv) {
                return Ok(finish(w, ru, rv, iterations, history));
            }
            return Err(Error::MaxIterations { max_iter: config.max_iter });
        }
        let stuck = |ru: &Rational, rv: &Rational| Error::NoProgress {
            iteration: iterations,
            residual_translation: rational::format(ru),
            residual_dilation: rational::format(rv),
        };
        let mut progressed = false;
        if !ru.is_zero() && !rv.is_zero() {
            progressed = relocate(m, &mut w, &mut u, &mut v, &ru, &rv, radius, config)?;
        }
        if !progressed {
            if within(&ru, &rv) {
                return Ok(finish(w, ru, rv, iterations, history));
            }
            let target = &config.tolerance / rational::int(4);
            let step = if config.exchange { exchange(m, &d, s, &w, &u, &v, &ru, &rv, &target)? } else { None };
            let Some((w2, u2, v2)) = step else {
                return Err(stuck(&ru, &rv));
            };
            (w, u, v) = (w2, u2, v2);
        }
        iterations += 1;
        ru = u.volume()?;
        rv = v.volume()?;
        check_pieces(config.max_pieces, &[&w, &u, &v])?;
        check_invariants(m, &w, &d, &vol_d, &ru, &rv)?;
        history.push(ResidualStep { translation: ru.clone(), dilation: rv.clone() });
    }
}

/// One greedy pass: adjoins `(U + k) ∩ B^j V` at the first level `j` that
/// yields anything, trying guided levels before unguided ones.
#[allow(clippy::too_many_arguments)]
fn relocate(
    m: &DilationMatrix,
    w: &mut FrequencySet,
    u: &mut FrequencySet,
    v: &mut FrequencySet,
    ru: &Rational,
    rv: &Rational,
    radius: i32,
    config: &CompletionConfig,
) -> Result<bool> {
    let rho = rv / ru;
    let mut progressed = false;
    for clip in [config.guide.as_ref(), None] {
        for j in level_order(m.det_abs(), &rho, radius) {
            let bv = match clip {
                Some(g) => v.dilate(m, j).intersection(g)?,
                None => v.dilate(m, j),
            };
            let (Some(ubox), Some(vbox)) = (u.bounding_box(), bv.bounding_box()) else { continue };
            for k in translation_window(&ubox.0, &ubox.1, &vbox) {
                let q = u.translate(&k).intersection(&bv)?;
                if q.is_empty() {
                    continue;
                }
                let back: Vec<i64> = k.iter().map(|x| -x).collect();
                *u = u.difference(&q.translate(&back))?;
                *v = v.difference(&q.dilate(m, -j))?;
                w.extend(q);
                progressed = true;
            }
            if progressed {
                break;
            }
        }
        if progressed || config.guide.is_none() {
            break;
        }
    }
    Ok(progressed)
}

/// Deepest scale tried by [`exchange`].
const MAX_EXCHANGE_DEPTH: u32 = 60;

/// One link of a Schröder–Bernstein chain, for a completion the greedy pass
/// cannot advance.
///
/// With `V` nonempty, `X = B^(-L) V` lies next to the origin. Its dilation
/// class is unfilled, so adding it keeps the dilates of `W` disjoint; the
/// parts of `W` in its translation class are evicted and their dilation
/// classes become the new `V`. Those parts sit about `L` levels above `X`,
/// so the residual shrinks by roughly `a^(-L)`. With `V` empty the roles
/// swap: `X = U + B^L e_1` lies far out and evicts the parts of `W` in its
/// dilation class. Depths that would evict part of the seed, or that fail
/// to shrink the residual by a factor `a`, are skipped.
#[allow(clippy::too_many_arguments)]
fn exchange(
    m: &DilationMatrix,
    d: &FrequencySet,
    seed: &FrequencySet,
    w: &FrequencySet,
    u: &FrequencySet,
    v: &FrequencySet,
    ru: &Rational,
    rv: &Rational,
    target: &Rational,
) -> Result<Option<(FrequencySet, FrequencySet, FrequencySet)>> {
    let n = m.n();
    let a = rational::int(m.det_abs() as i64);
    let inward = !v.is_empty();
    let residual = if inward { rv } else { ru };
    let mut depth = 1u32;
    while depth < MAX_EXCHANGE_DEPTH && rational::pow(&a, depth) * target <= residual * &a * &a {
        depth += 1;
    }
    let wbox = w.bounding_box().expect("the seed is nonempty");
    let wring = w.bounding_annulus().expect("the seed is nonempty");
    for l in depth..=MAX_EXCHANGE_DEPTH {
        let mut evicted = FrequencySet::empty(n);
        let mut clash = false;
        let x = if inward {
            let x = v.dilate(m, -(l as i32));
            let (lo, hi) = x.bounding_box().expect("nonempty");
            for k in translation_window(&lo, &hi, &wbox) {
                let shifted = x.translate(&k);
                if shifted.intersects(seed)? == Overlap::PositiveMeasureOverlap {
                    clash = true;
                    break;
                }
                evicted.extend(shifted.intersection(w)?);
            }
            x
        } else {
            let e1: Vec<Rational> = (0..n).map(|i| if i == 0 { Rational::one() } else { Rational::zero() }).collect();
            let Some(k) =
                m.apply_b(l as i32, &e1).iter().map(|c| c.to_integer().to_i64()).collect::<Option<Vec<i64>>>()
            else {
                break;
            };
            let x = u.translate(&k);
            let ring = x.bounding_annulus().expect("nonempty");
            for j in crate::freqset::dilation_window(m, &ring, &wring, "the exchanged set")? {
                let image = x.dilate(m, j);
                if image.intersects(seed)? == Overlap::PositiveMeasureOverlap {
                    clash = true;
                    break;
                }
                evicted.extend(image.intersection(w)?);
            }
            x
        };
        if clash {
            continue;
        }
        let (u2, v2) = if inward {
            (u.difference(&x.tau_projection()?)?, evicted.d_projection(d, m)?)
        } else {
            (evicted.tau_projection()?, v.difference(&x.d_projection(d, m)?)?)
        };
        let after = if inward { v2.volume()? } else { u2.volume()? };
        if &after * &a > *residual {
            continue;
        }
        let mut w2 = w.difference(&evicted)?;
        w2.extend(x);
        return Ok(Some((w2, u2, v2)));
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionReport {
    pub seed: SeedSpec,
    pub seed_check: SeedCheck,
    #[serde(rename = "W")]
    pub w: FrequencySet,
    #[serde(rename = "J")]
    pub j: FrequencySet,
    #[serde(with = "serde_rational")]
    pub residual_translation: Rational,
    #[serde(with = "serde_rational")]
    pub residual_dilation: Rational,
    pub iterations: u32,
    pub piece_count: usize,
    pub exact: bool,
    pub history: Vec<ResidualStep>,
    /// Completions run, this one included.
    pub attempts: u32,
}

/// Seeds drawn by [`construct`] before falling back to exchange steps.
pub const SEED_ATTEMPTS: u64 = 8;

/// Draws a seed and completes it to a wavelet set.
///
/// Greedy completions are tried from seeds drawn with `rng_seed`,
/// `rng_seed + 1`, and so on. If all of them stall and `config.exchange` is
/// set, the first seed is completed again with exchange steps, which ends
/// inexact once both residuals are below the tolerance.
pub fn construct(
    m: &DilationMatrix,
    r: u32,
    p: i32,
    rng_seed: u64,
    config: &CompletionConfig,
) -> Result<ConstructionReport> {
    let greedy = config.clone().with_exchange(false);
    let mut last = None;
    for attempt in 0..SEED_ATTEMPTS {
        match construct_once(m, r, p, rng_seed.wrapping_add(attempt), &greedy) {
            Err(e @ Error::NoProgress { .. }) => last = Some(e),
            Ok(mut report) => {
                report.attempts = attempt as u32 + 1;
                return Ok(report);
            }
            Err(e) => return Err(e),
        }
    }
    if !config.exchange {
        return Err(last.expect("at least one attempt"));
    }
    let mut report = construct_once(m, r, p, rng_seed, config)?;
    report.attempts = SEED_ATTEMPTS as u32 + 1;
    Ok(report)
}

fn construct_once(
    m: &DilationMatrix,
    r: u32,
    p: i32,
    rng_seed: u64,
    config: &CompletionConfig,
) -> Result<ConstructionReport> {
    let seed = build_seed(m, r, p, rng_seed)?;
    let seed_check = check_seed(m, &seed)?;
    let s = seed.seed_set(m)?;
    let config = match &config.guide {
        Some(_) => config.clone(),
        None => config.clone().with_guide(reference_set(m, &seed.k_r)),
    };
    let c = complete_to_wavelet_set(m, &s, &config)?;
    let j = c.w.difference(&s)?;
    Ok(ConstructionReport {
        piece_count: c.w.len(),
        seed,
        seed_check,
        w: c.w,
        j,
        residual_translation: c.residual_translation,
        residual_dilation: c.residual_dilation,
        iterations: c.iterations,
        exact: c.exact,
        history: c.history,
        attempts: 1,
    })
}

/// `ψ̂_r`: `1/√2` on `I ∪ B^(-1) I ∪ (B^(-1) I + k_r)`, `-1/√2` on `I + B k_r`,
/// `1` on `J`, zero elsewhere.
pub fn assemble_psi_r(
    m: &DilationMatrix,
    report: &ConstructionReport,
    allow_inexact: bool,
) -> Result<PiecewiseWavelet> {
    if report.seed.p != 1 {
        return Err(Error::InvalidSeed(format!("the wavelet needs p = 1, got {}", report.seed.p)));
    }
    if !report.exact && !allow_inexact {
        return Err(Error::Inexact {
            residual_translation: rational::format(&report.residual_translation),
            residual_dilation: rational::format(&report.residual_dilation),
        });
    }
    let i = &report.seed.i;
    let bk = m.apply_b_int(1, &report.seed.k_r);
    let h = ExactValue::inv_sqrt2();
    let regions: Vec<(&str, FrequencySet, ExactValue)> = vec![
        ("I", i.clone(), h.clone()),
        ("B^-1 I", i.dilate(m, -1), h.clone()),
        ("B^-1 I + k_r", i.dilate(m, -1).translate(&report.seed.k_r), h.clone()),
        ("I + B k_r", i.translate(&bk), h.neg()),
        ("J", report.j.clone(), ExactValue::one()),
    ];
    for a in 0..regions.len() {
        for b in a + 1..regions.len() {
            if regions[a].1.intersects(&regions[b].1)? == Overlap::PositiveMeasureOverlap {
                return Err(Error::OverlapDetected { first: regions[a].0.into(), second: regions[b].0.into() });
            }
        }
    }
    let mut pieces = Vec::new();
    let mut values = Vec::new();
    for (_, set, value) in regions {
        for p in set.into_pieces() {
            pieces.push(p);
            values.push(value.clone());
        }
    }
    PiecewiseWavelet::new(FrequencySet::from_pieces(m.n(), pieces), values, m.clone())
}

/// Replaces every negative value by its absolute value; a wavelet with a
/// cancelling sign pattern no longer satisfies the orthogonality sums.
pub fn sign_flip_tamper(w: &PiecewiseWavelet) -> Result<PiecewiseWavelet> {
    let values = w.values().iter().map(|v| if v.m().is_negative() { v.neg() } else { v.clone() }).collect();
    PiecewiseWavelet::new(w.support().clone(), values, w.matrix().clone())
}

#[cfg(test)]
mod tests;
