use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::lp::{self, Row};
use crate::matrix::{affine_rank, Matrix};
use crate::rational::{self, Rational};

/// Largest dimension for the vertex-based exact paths (volume, difference).
pub const EXACT_DIM_CAP: usize = 3;

/// `<a, x> <= b`, scaled so `a` is a primitive integer vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Halfspace {
    pub a: Vec<Rational>,
    pub b: Rational,
}

impl Halfspace {
    pub fn new(a: Vec<Rational>, b: Rational) -> Self {
        let den = rational::common_denominator(&a);
        let nums: Vec<BigInt> = a.iter().map(|x| (x * Rational::from_integer(den.clone())).to_integer()).collect();
        let g = nums.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g.is_zero() {
            let b = if b.is_negative() {
                -Rational::one()
            } else if b.is_zero() {
                Rational::zero()
            } else {
                Rational::one()
            };
            return Halfspace { a, b };
        }
        let scale = Rational::new(den, g);
        Halfspace { a: a.iter().map(|x| x * &scale).collect(), b: b * scale }
    }

    /// `b - <a, x>`: positive strictly inside.
    pub fn slack(&self, x: &[Rational]) -> Rational {
        &self.b - rational::dot(&self.a, x)
    }

    pub fn complement(&self) -> Halfspace {
        Halfspace { a: self.a.iter().map(|x| -x).collect(), b: -&self.b }
    }

    pub fn translate(&self, k: &[Rational]) -> Halfspace {
        Halfspace { a: self.a.clone(), b: &self.b + rational::dot(&self.a, k) }
    }

    fn row(&self) -> Row {
        (self.a.clone(), self.b.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

/// A convex polytope `{x : <a_i, x> <= b_i}` with a lazily computed vertex set.
#[derive(Clone, Debug)]
pub struct Polytope {
    n: usize,
    halfspaces: Vec<Halfspace>,
    vertices: OnceLock<Vec<Vec<Rational>>>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.halfspaces == other.halfspaces
    }
}

impl Eq for Polytope {}

impl Polytope {
    pub fn new(n: usize, halfspaces: Vec<Halfspace>) -> Self {
        Polytope { n, halfspaces, vertices: OnceLock::new() }
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn cuboid(lo: &[Rational], hi: &[Rational]) -> Self {
        let n = lo.len();
        let mut hs = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[i] = Rational::one();
            hs.push(Halfspace::new(e.clone(), hi[i].clone()));
            e[i] = -Rational::one();
            hs.push(Halfspace::new(e, -&lo[i]));
        }
        Polytope::new(n, hs)
    }

    /// l-infinity ball of radius `r` about `center`.
    pub fn cube(center: &[Rational], r: &Rational) -> Self {
        let lo: Vec<Rational> = center.iter().map(|c| c - r).collect();
        let hi: Vec<Rational> = center.iter().map(|c| c + r).collect();
        Self::cuboid(&lo, &hi)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn member(&self, x: &[Rational]) -> Membership {
        let mut boundary = false;
        for h in &self.halfspaces {
            let s = h.slack(x);
            if s.is_negative() {
                return Membership::Outside;
            }
            if s.is_zero() {
                boundary = true;
            }
        }
        if boundary {
            Membership::Boundary
        } else {
            Membership::Inside
        }
    }

    /// Vertex set (n <= 3 in practice; enumeration is combinatorial in n).
    pub fn vertices(&self) -> &[Vec<Rational>] {
        self.vertices.get_or_init(|| enumerate_vertices(self.n, &self.halfspaces))
    }

    /// Drops redundant constraints and returns `None` for empty or lower-dimensional
    /// polytopes. Vertex-based for `n <= 3`, LP-based above.
    pub fn normalize(self) -> Option<Polytope> {
        if self.n > EXACT_DIM_CAP {
            let mut hs = self.halfspaces.clone();
            hs.sort();
            hs.dedup();
            let p = Polytope::new(self.n, hs);
            return p.has_interior().then_some(p);
        }
        let verts = self.vertices().to_vec();
        let refs: Vec<&[Rational]> = verts.iter().map(Vec::as_slice).collect();
        if affine_rank(&refs) != Some(self.n) {
            return None;
        }
        let mut kept: Vec<Halfspace> = Vec::new();
        for h in &self.halfspaces {
            if h.a.iter().all(Zero::is_zero) || kept.contains(h) {
                continue;
            }
            let on: Vec<&[Rational]> = refs.iter().copied().filter(|v| h.slack(v).is_zero()).collect();
            if affine_rank(&on) == Some(self.n - 1) {
                kept.push(h.clone());
            }
        }
        let p = Polytope::new(self.n, kept);
        let _ = p.vertices.set(verts);
        Some(p)
    }

    /// Positive-slack LP certificate of a nonempty interior.
    pub fn has_interior(&self) -> bool {
        self.interior_witness().is_some()
    }

    /// A point and slack `t > 0` with `<a_i, x> + t <= b_i` for every constraint.
    pub fn interior_witness(&self) -> Option<(Vec<Rational>, Rational)> {
        let rows: Vec<Row> = self.halfspaces.iter().map(Halfspace::row).collect();
        let (x, t) = lp::max_min_slack(&rows, self.n)?;
        t.is_positive().then_some((x, t))
    }

    /// Exact bounding box.
    pub fn bounding_box(&self) -> (Vec<Rational>, Vec<Rational>) {
        if self.n <= EXACT_DIM_CAP {
            let v = self.vertices();
            let lo = (0..self.n).map(|i| v.iter().map(|p| p[i].clone()).min().unwrap_or_default()).collect();
            let hi = (0..self.n).map(|i| v.iter().map(|p| p[i].clone()).max().unwrap_or_default()).collect();
            return (lo, hi);
        }
        let rows: Vec<Row> = self.halfspaces.iter().map(Halfspace::row).collect();
        let mut lo = Vec::with_capacity(self.n);
        let mut hi = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut c = vec![Rational::zero(); self.n];
            c[i] = Rational::one();
            hi.push(match lp::maximize(&c, &rows) {
                lp::LpOutcome::Optimal { value, .. } => value,
                _ => Rational::zero(),
            });
            c[i] = -Rational::one();
            lo.push(match lp::maximize(&c, &rows) {
                lp::LpOutcome::Optimal { value, .. } => -value,
                _ => Rational::zero(),
            });
        }
        (lo, hi)
    }

    /// Whether the polytope is bounded (checked by LP in every coordinate direction).
    pub fn is_bounded(&self) -> bool {
        let rows: Vec<Row> = self.halfspaces.iter().map(Halfspace::row).collect();
        for i in 0..self.n {
            for sign in [1i64, -1] {
                let mut c = vec![Rational::zero(); self.n];
                c[i] = rational::int(sign);
                if lp::maximize(&c, &rows) == lp::LpOutcome::Unbounded {
                    return false;
                }
            }
        }
        true
    }

    /// `min_{x in P} ||x||_inf` by LP.
    pub fn min_inf_norm(&self) -> Rational {
        let n = self.n;
        let mut rows: Vec<Row> = self
            .halfspaces
            .iter()
            .map(|h| {
                let mut a = h.a.clone();
                a.push(Rational::zero());
                (a, h.b.clone())
            })
            .collect();
        for i in 0..n {
            for sign in [1i64, -1] {
                let mut a = vec![Rational::zero(); n + 1];
                a[i] = rational::int(sign);
                a[n] = -Rational::one();
                rows.push((a, Rational::zero()));
            }
        }
        let mut c = vec![Rational::zero(); n + 1];
        c[n] = -Rational::one();
        match lp::maximize(&c, &rows) {
            lp::LpOutcome::Optimal { value, .. } => -value,
            _ => Rational::zero(),
        }
    }

    /// Exact volume by barycentric simplicial decomposition.
    pub fn volume(&self) -> Rational {
        let verts = self.vertices();
        let refs: Vec<&[Rational]> = verts.iter().map(Vec::as_slice).collect();
        if affine_rank(&refs) != Some(self.n) {
            return Rational::zero();
        }
        let facets: Vec<Vec<usize>> = self
            .halfspaces
            .iter()
            .map(|h| (0..verts.len()).filter(|&i| h.slack(&verts[i]).is_zero()).collect())
            .collect();
        let all: Vec<usize> = (0..verts.len()).collect();
        let mut simplices = Vec::new();
        triangulate(verts, &facets, &all, self.n, &mut simplices);
        let fact: Rational = (1..=self.n as i64).map(rational::int).product();
        simplices.iter().map(|s| simplex_volume(s)).sum::<Rational>() / fact
    }

    /// Image under `y = M x`; `m_inv` must be `M^(-1)`.
    pub fn linear_image(&self, m: &Matrix, m_inv: &Matrix) -> Polytope {
        let hs = self
            .halfspaces
            .iter()
            .map(|h| {
                let a: Vec<Rational> =
                    (0..self.n).map(|j| (0..self.n).map(|i| &h.a[i] * &m_inv[(i, j)]).sum()).collect();
                Halfspace::new(a, h.b.clone())
            })
            .collect();
        let p = Polytope::new(self.n, hs);
        if let Some(v) = self.vertices.get() {
            let _ = p.vertices.set(v.iter().map(|x| m.mul_vec(x)).collect());
        }
        p
    }

    pub fn translate(&self, k: &[Rational]) -> Polytope {
        let p = Polytope::new(self.n, self.halfspaces.iter().map(|h| h.translate(k)).collect());
        if let Some(v) = self.vertices.get() {
            let moved = v.iter().map(|x| x.iter().zip(k).map(|(a, b)| a + b).collect()).collect();
            let _ = p.vertices.set(moved);
        }
        p
    }

    /// Raw conjunction of constraints (not normalized).
    pub fn conjoin(&self, other: &Polytope) -> Polytope {
        let mut hs = self.halfspaces.clone();
        hs.extend(other.halfspaces.iter().cloned());
        Polytope::new(self.n, hs)
    }

    pub fn with_halfspace(&self, h: Halfspace) -> Polytope {
        let mut hs = self.halfspaces.clone();
        hs.push(h);
        Polytope::new(self.n, hs)
    }

    /// Whether the two interiors meet, by exact LP.
    pub fn interiors_meet(&self, other: &Polytope) -> bool {
        if !boxes_overlap(&self.bounding_box(), &other.bounding_box()) {
            return false;
        }
        self.conjoin(other).has_interior()
    }

    /// Normalized intersection, `None` when of measure zero.
    pub fn intersection(&self, other: &Polytope) -> Option<Polytope> {
        if !boxes_overlap(&self.bounding_box(), &other.bounding_box()) {
            return None;
        }
        self.conjoin(other).normalize()
    }

    /// `self \ other` as essentially disjoint convex pieces (n <= 3).
    pub fn difference(&self, other: &Polytope) -> Vec<Polytope> {
        if !boxes_overlap(&self.bounding_box(), &other.bounding_box()) {
            return vec![self.clone()];
        }
        if self.vertices().iter().all(|v| other.member(v) != Membership::Outside) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut rest = self.clone();
        for h in &other.halfspaces {
            if let Some(piece) = rest.with_halfspace(h.complement()).normalize() {
                out.push(piece);
            }
            match rest.with_halfspace(h.clone()).normalize() {
                Some(r) => rest = r,
                None => return out,
            }
        }
        out
    }
}

/// Closed boxes overlap with positive measure.
pub fn boxes_overlap(a: &(Vec<Rational>, Vec<Rational>), b: &(Vec<Rational>, Vec<Rational>)) -> bool {
    (0..a.0.len()).all(|i| a.0[i] < b.1[i] && b.0[i] < a.1[i])
}

fn enumerate_vertices(n: usize, hs: &[Halfspace]) -> Vec<Vec<Rational>> {
    let mut found: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let usable: Vec<&Halfspace> = hs.iter().filter(|h| h.a.iter().any(|x| !x.is_zero())).collect();
    if hs.iter().any(|h| h.a.iter().all(Zero::is_zero) && h.b.is_negative()) {
        return Vec::new();
    }
    let m = usable.len();
    if m < n {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let mat = Matrix::from_rows(idx.iter().map(|&i| usable[i].a.clone()).collect());
        let rhs: Vec<Rational> = idx.iter().map(|&i| usable[i].b.clone()).collect();
        if let Some(x) = mat.solve(&rhs) {
            if !found.contains(&x) && hs.iter().all(|h| !h.slack(&x).is_negative()) {
                found.insert(x);
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return found.into_iter().collect();
            }
            k -= 1;
            if idx[k] < m - n + k {
                idx[k] += 1;
                for j in k + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn barycenter(verts: &[Vec<Rational>], face: &[usize]) -> Vec<Rational> {
    let n = verts[face[0]].len();
    let count = rational::int(face.len() as i64);
    (0..n).map(|i| face.iter().map(|&v| verts[v][i].clone()).sum::<Rational>() / &count).collect()
}

/// Barycentric triangulation of the face spanned by `face` (of dimension `dim`).
fn triangulate(
    verts: &[Vec<Rational>],
    facets: &[Vec<usize>],
    face: &[usize],
    dim: usize,
    out: &mut Vec<Vec<Vec<Rational>>>,
) {
    if dim == 0 {
        out.push(vec![verts[face[0]].clone()]);
        return;
    }
    let center = barycenter(verts, face);
    let mut subfaces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for f in facets {
        let sub: Vec<usize> = face.iter().copied().filter(|v| f.contains(v)).collect();
        if sub.len() < dim || sub.len() == face.len() {
            continue;
        }
        let refs: Vec<&[Rational]> = sub.iter().map(|&v| verts[v].as_slice()).collect();
        if affine_rank(&refs) == Some(dim - 1) {
            subfaces.insert(sub);
        }
    }
    for sub in subfaces {
        let mut inner = Vec::new();
        triangulate(verts, facets, &sub, dim - 1, &mut inner);
        for mut s in inner {
            s.push(center.clone());
            out.push(s);
        }
    }
}

fn simplex_volume(s: &[Vec<Rational>]) -> Rational {
    let base = &s[0];
    let rows = s[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    Matrix::from_rows(rows).det().abs()
}
