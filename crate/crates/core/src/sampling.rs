//! Seeded rational sampling and fast exact point location.
//!
//! Sample points live on the grid `Z^n / P` with `P = 2^31 - 1`. Dilations
//! keep them integer-over-integer (`B` is integral, `B^(-1) = adj(B) / det`),
//! so membership in a compiled polytope is a handful of `i128` products.
//! Any overflow falls back to exact big-rational evaluation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::freqset::{FrequencySet, Membership, Polytope};
use crate::lattice::DilationMatrix;
use crate::rational::{self, Rational};

/// Grid denominator for sampled coordinates (a prime).
pub const GRID: i64 = 2_147_483_647;

/// Attempts per sample before a point on a null set is accepted as unusable.
pub const MAX_REDRAWS: usize = 256;

/// An independent, reproducible stream for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A rational point `num / den` with `den > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridPoint {
    pub num: Vec<i128>,
    pub den: i128,
}

impl GridPoint {
    pub fn from_rational(x: &[Rational]) -> Option<GridPoint> {
        let den = rational::common_denominator(x);
        let num: Option<Vec<i128>> = x.iter().map(|v| (v.numer() * (&den / v.denom())).to_i128()).collect();
        Some(GridPoint { num: num?, den: den.to_i128()? })
    }

    pub fn to_rational(&self) -> Vec<Rational> {
        self.num.iter().map(|&v| Rational::new(BigInt::from(v), BigInt::from(self.den))).collect()
    }

    fn reduced(mut self) -> GridPoint {
        let g = self.num.iter().fold(self.den, |g, &v| g.gcd(&v));
        if g > 1 {
            self.num.iter_mut().for_each(|v| *v /= g);
            self.den /= g;
        }
        self
    }

    /// `self + k`.
    pub fn shifted(&self, k: &[i64]) -> Option<GridPoint> {
        let num: Option<Vec<i128>> =
            self.num.iter().zip(k).map(|(&v, &k)| (k as i128).checked_mul(self.den)?.checked_add(v)).collect();
        Some(GridPoint { num: num?, den: self.den })
    }

    pub fn inf_norm(&self) -> Rational {
        let top = self.num.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        Rational::new(BigInt::from(top), BigInt::from(self.den))
    }
}

/// Integer forms of `B` and `adj(B) = det(B) B^(-1)` for exact grid dilation.
#[derive(Clone, Debug)]
pub struct GridDilation {
    b: Vec<Vec<i128>>,
    adj: Vec<Vec<i128>>,
    det: i128,
}

impl GridDilation {
    pub fn new(m: &DilationMatrix) -> Self {
        let n = m.n();
        let b: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| m.entries()[j][i] as i128).collect()).collect();
        let det = m.b().det().to_integer().to_i128().expect("determinant fits");
        let adj = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (&m.b_inv()[(i, j)] * Rational::from_integer(det.into()))
                            .to_integer()
                            .to_i128()
                            .expect("adjugate fits")
                    })
                    .collect()
            })
            .collect();
        GridDilation { b, adj, det }
    }

    fn apply(mat: &[Vec<i128>], v: &[i128]) -> Option<Vec<i128>> {
        mat.iter()
            .map(|row| row.iter().zip(v).try_fold(0i128, |acc, (&a, &x)| acc.checked_add(a.checked_mul(x)?)))
            .collect()
    }

    /// `B^j x`, or `None` on `i128` overflow.
    pub fn dilate(&self, x: &GridPoint, j: i32) -> Option<GridPoint> {
        let mut p = x.clone();
        if j >= 0 {
            for _ in 0..j {
                p.num = Self::apply(&self.b, &p.num)?;
                p = p.reduced();
            }
        } else {
            for _ in 0..(-j) {
                let mut num = Self::apply(&self.adj, &p.num)?;
                if self.det < 0 {
                    num.iter_mut().for_each(|v| *v = -*v);
                }
                p = GridPoint { num, den: p.den.checked_mul(self.det.abs())? }.reduced();
            }
        }
        Some(p)
    }
}

/// Where a point falls relative to a piecewise set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside(usize),
    Boundary,
    Outside,
}

#[derive(Clone, Debug)]
struct CompiledPiece {
    // rows c.x <= d with integer c, d
    rows: Vec<(Vec<i128>, i128)>,
    lo: Vec<(i128, i128)>,
    hi: Vec<(i128, i128)>,
}

fn frac(q: &Rational) -> Option<(i128, i128)> {
    Some((q.numer().to_i128()?, q.denom().to_i128()?))
}

impl CompiledPiece {
    fn new(p: &Polytope) -> Option<CompiledPiece> {
        let rows = p
            .halfspaces()
            .iter()
            .map(|h| {
                // a.x <= p/q  becomes  (q a).x <= p
                let c: Option<Vec<i128>> = h.a.iter().map(|a| (a.numer() * h.b.denom()).to_i128()).collect();
                Some((c?, h.b.numer().to_i128()?))
            })
            .collect::<Option<Vec<_>>>()?;
        let (lo, hi) = p.bounding_box();
        Some(CompiledPiece {
            rows,
            lo: lo.iter().map(frac).collect::<Option<_>>()?,
            hi: hi.iter().map(frac).collect::<Option<_>>()?,
        })
    }

    /// `None` on overflow.
    fn locate(&self, x: &GridPoint) -> Option<Membership> {
        for (i, &v) in x.num.iter().enumerate() {
            // v / den vs lo = a / b:  v b vs a den
            let (a, b) = self.lo[i];
            if v.checked_mul(b)? < a.checked_mul(x.den)? {
                return Some(Membership::Outside);
            }
            let (a, b) = self.hi[i];
            if v.checked_mul(b)? > a.checked_mul(x.den)? {
                return Some(Membership::Outside);
            }
        }
        let mut boundary = false;
        for (c, d) in &self.rows {
            let lhs = c.iter().zip(&x.num).try_fold(0i128, |acc, (&c, &v)| acc.checked_add(c.checked_mul(v)?))?;
            let rhs = d.checked_mul(x.den)?;
            if lhs > rhs {
                return Some(Membership::Outside);
            }
            if lhs == rhs {
                boundary = true;
            }
        }
        Some(if boundary { Membership::Boundary } else { Membership::Inside })
    }
}

/// A frequency set prepared for repeated exact point location.
#[derive(Clone, Debug)]
pub struct CompiledSet {
    set: FrequencySet,
    pieces: Vec<Option<CompiledPiece>>,
}

impl CompiledSet {
    pub fn new(set: &FrequencySet) -> Self {
        CompiledSet { set: set.clone(), pieces: set.pieces().iter().map(CompiledPiece::new).collect() }
    }

    pub fn set(&self) -> &FrequencySet {
        &self.set
    }

    /// Piece index of an interior point. A point on any piece boundary reports
    /// `Boundary` even when it is interior to the union.
    pub fn locate(&self, x: &GridPoint) -> Location {
        let mut found = None;
        let mut boundary = false;
        for (idx, (piece, poly)) in self.pieces.iter().zip(self.set.pieces()).enumerate() {
            let m = match piece.as_ref().and_then(|c| c.locate(x)) {
                Some(m) => m,
                None => poly.member(&x.to_rational()),
            };
            match m {
                Membership::Inside => {
                    if found.is_none() {
                        found = Some(idx);
                    }
                }
                Membership::Boundary => boundary = true,
                Membership::Outside => {}
            }
        }
        match (boundary, found) {
            (true, _) => Location::Boundary,
            (false, Some(i)) => Location::Inside(i),
            (false, None) => Location::Outside,
        }
    }

    /// Location of an exact rational point that may not fit the fast path.
    pub fn locate_rational(&self, x: &[Rational]) -> Location {
        if let Some(g) = GridPoint::from_rational(x) {
            return self.locate(&g);
        }
        let mut found = None;
        for (idx, p) in self.set.pieces().iter().enumerate() {
            match p.member(x) {
                Membership::Inside => found = found.or(Some(idx)),
                Membership::Boundary => return Location::Boundary,
                Membership::Outside => {}
            }
        }
        found.map_or(Location::Outside, Location::Inside)
    }
}

/// Dilates a grid point, falling back to exact arithmetic when `i128` overflows.
pub fn dilate_point(g: &GridDilation, m: &DilationMatrix, x: &GridPoint, j: i32) -> PointRef {
    match g.dilate(x, j) {
        Some(p) => PointRef::Grid(p),
        None => PointRef::Exact(m.apply_b(j, &x.to_rational())),
    }
}

/// A point in whichever representation survived the arithmetic.
#[derive(Clone, Debug)]
pub enum PointRef {
    Grid(GridPoint),
    Exact(Vec<Rational>),
}

impl PointRef {
    pub fn locate(&self, set: &CompiledSet) -> Location {
        match self {
            PointRef::Grid(p) => set.locate(p),
            PointRef::Exact(x) => set.locate_rational(x),
        }
    }

    pub fn to_rational(&self) -> Vec<Rational> {
        match self {
            PointRef::Grid(p) => p.to_rational(),
            PointRef::Exact(x) => x.clone(),
        }
    }

    pub fn shifted(&self, k: &[i64]) -> PointRef {
        match self {
            PointRef::Grid(p) => match p.shifted(k) {
                Some(q) => PointRef::Grid(q),
                None => PointRef::Exact(shift_exact(&p.to_rational(), k)),
            },
            PointRef::Exact(x) => PointRef::Exact(shift_exact(x, k)),
        }
    }

    pub fn inf_norm(&self) -> Rational {
        match self {
            PointRef::Grid(p) => p.inf_norm(),
            PointRef::Exact(x) => rational::max_abs(x),
        }
    }
}

fn shift_exact(x: &[Rational], k: &[i64]) -> Vec<Rational> {
    x.iter().zip(k).map(|(v, &k)| v + rational::int(k)).collect()
}

/// Uniform grid point in the box `[lo, hi]`.
pub fn point_in_box<R: Rng>(rng: &mut R, lo: &[Rational], hi: &[Rational]) -> GridPoint {
    let scale = Rational::from_integer(GRID.into());
    let num = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| {
            let a = rational::ceil(&(l * &scale)).to_i64().expect("sample box fits");
            let b = rational::floor(&(h * &scale)).to_i64().expect("sample box fits");
            rng.gen_range(a..=b.max(a)) as i128
        })
        .collect();
    GridPoint { num, den: GRID as i128 }.reduced()
}

/// A grid point strictly inside `p`, by rejection from its bounding box.
pub fn point_in_polytope<R: Rng>(rng: &mut R, p: &Polytope) -> Option<GridPoint> {
    let (lo, hi) = p.bounding_box();
    let compiled = CompiledPiece::new(p);
    for _ in 0..MAX_REDRAWS {
        let x = point_in_box(rng, &lo, &hi);
        let m = match compiled.as_ref().and_then(|c| c.locate(&x)) {
            Some(m) => m,
            None => p.member(&x.to_rational()),
        };
        if m == Membership::Inside {
            return Some(x);
        }
    }
    None
}

/// A grid point strictly inside one of the pieces of `s`, choosing the piece
/// uniformly at random. `None` if `s` is empty or the draw keeps missing.
pub fn point_in_random_piece<R: Rng>(rng: &mut R, s: &FrequencySet) -> Option<(usize, GridPoint)> {
    if s.is_empty() {
        return None;
    }
    let idx = rng.gen_range(0..s.len());
    point_in_polytope(rng, &s.pieces()[idx]).map(|x| (idx, x))
}

/// A grid point strictly inside `s`, uniform over its bounding box by rejection.
pub fn point_in_set<R: Rng>(rng: &mut R, s: &CompiledSet) -> Option<GridPoint> {
    let (lo, hi) = s.set().bounding_box()?;
    for _ in 0..MAX_REDRAWS {
        let x = point_in_box(rng, &lo, &hi);
        if let Location::Inside(_) = s.locate(&x) {
            return Some(x);
        }
    }
    None
}

/// Uniform grid point in the half-open cell `[-1/2, 1/2)^n`; never on its boundary.
pub fn point_in_cell<R: Rng>(rng: &mut R, n: usize) -> GridPoint {
    let half = (GRID - 1) / 2;
    GridPoint { num: (0..n).map(|_| rng.gen_range(-half..=half) as i128).collect(), den: GRID as i128 }
}
