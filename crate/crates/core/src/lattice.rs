//! Integer dilation matrices and the lattice arithmetic built on them.
//!
//! `A` acts in the time domain and `B = A^t` in the frequency domain. All
//! predicates here are decided in exact rational arithmetic.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{self, Rational};

pub const DEFAULT_MAX_EXPONENT: u32 = 64;

/// A validated dilation matrix together with its expansiveness certificate.
///
/// The certificate is the smallest `m` for which every row of `B^(-m)` has
/// l1-norm below one, so `||B^(-m) x||_inf < ||x||_inf` for all `x != 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DilationMatrix {
    n: usize,
    entries: Vec<Vec<i64>>,
    a: Matrix,
    b: Matrix,
    b_inv: Matrix,
    det_abs: u64,
    contraction_exponent: u32,
    contraction_norm: Rational,
}

impl DilationMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The integer entries of `A`, row-major.
    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn b_inv(&self) -> &Matrix {
        &self.b_inv
    }

    /// `a = |det A|`, the number of cosets of `A Z^n`.
    pub fn det_abs(&self) -> u64 {
        self.det_abs
    }

    pub fn contraction_exponent(&self) -> u32 {
        self.contraction_exponent
    }

    /// Row norm of `B^(-m)` for the certified `m`; strictly below one.
    pub fn contraction_norm(&self) -> &Rational {
        &self.contraction_norm
    }

    /// `B^j` for any integer `j`.
    pub fn b_pow(&self, j: i32) -> Matrix {
        if j >= 0 {
            self.b.pow(j).expect("nonnegative power")
        } else {
            self.b_inv.pow(-j).expect("nonnegative power")
        }
    }

    /// `max_{0 <= s < m} ||B^(-s)||_inf`, the slack factor between
    /// consecutive certified contractions.
    pub fn inverse_power_bound(&self) -> Rational {
        let mut acc = Matrix::identity(self.n);
        let mut best = Rational::one();
        for _ in 1..self.contraction_exponent {
            acc = acc.mul(&self.b_inv);
            best = best.max(acc.row_norm());
        }
        best
    }

    pub fn apply_b(&self, j: i32, v: &[Rational]) -> Vec<Rational> {
        self.b_pow(j).mul_vec(v)
    }

    pub fn apply_b_int(&self, j: u32, v: &[i64]) -> Vec<i64> {
        let q: Vec<Rational> = v.iter().map(|&x| rational::int(x)).collect();
        self.b_pow(j as i32)
            .mul_vec(&q)
            .iter()
            .map(|x| x.to_integer().to_i64().expect("lattice vector exceeds i64"))
            .collect()
    }
}

/// Validates `A` as a dilation matrix: integer, `|det A| >= 2`, and
/// expansive as certified by exact contraction of some `B^(-m)`, `m <= max_exponent`.
pub fn validate_dilation(rows: &[Vec<i64>], max_exponent: u32) -> Result<DilationMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::NotSquare { rows: n, cols: rows.iter().map(Vec::len).collect() });
    }
    let a = Matrix::from_int_rows(rows);
    let det = a.det();
    if det.abs() < rational::int(2) {
        return Err(Error::SingularOrUnimodular { det: det.to_string() });
    }
    let det_abs = det.abs().to_integer().to_u64().expect("determinant fits in u64");
    let b = a.transpose();
    let b_inv = b.inverse().expect("nonzero determinant");

    let mut power = Matrix::identity(n);
    let mut best: Option<Rational> = None;
    for m in 1..=max_exponent {
        power = power.mul(&b_inv);
        let norm = power.row_norm();
        if norm < Rational::one() {
            return Ok(DilationMatrix {
                n,
                entries: rows.to_vec(),
                a,
                b,
                b_inv,
                det_abs,
                contraction_exponent: m,
                contraction_norm: norm,
            });
        }
        best = Some(match best {
            Some(b) if b <= norm => b,
            _ => norm,
        });
    }
    Err(Error::NotExpansive { max_exponent, achieved: best.map(|b| rational::format(&b)).unwrap_or_default() })
}

/// Which matrix the cosets are taken modulo.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DigitBase {
    /// Cosets of `A Z^n`.
    A,
    /// Cosets of `B Z^n = A^t Z^n`.
    B,
}

/// A complete set of coset representatives of `Z^n / M Z^n`, zero first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitSet {
    base: DigitBase,
    modulus_inv: Matrix,
    digits: Vec<Vec<i64>>,
}

impl DigitSet {
    pub fn base(&self) -> DigitBase {
        self.base
    }

    pub fn digits(&self) -> &[Vec<i64>] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Whether `u - v` lies in the modulus lattice.
    pub fn congruent(&self, u: &[i64], v: &[i64]) -> bool {
        let diff: Vec<Rational> = u.iter().zip(v).map(|(x, y)| rational::int(x - y)).collect();
        self.modulus_inv.mul_vec(&diff).iter().all(rational::is_integer)
    }

    /// The digit congruent to `k`.
    pub fn reduce(&self, k: &[i64]) -> &[i64] {
        self.digits.iter().find(|d| self.congruent(k, d)).expect("digit set is complete")
    }
}

/// Canonical digit set for `A`: scan the box `[0, a)^n` with the first
/// coordinate varying fastest, keeping the first representative per coset.
pub fn digit_set(m: &DilationMatrix) -> DigitSet {
    build_digits(m, DigitBase::A)
}

/// Canonical digit set for `B = A^t`.
pub fn digit_set_b(m: &DilationMatrix) -> DigitSet {
    build_digits(m, DigitBase::B)
}

fn build_digits(m: &DilationMatrix, base: DigitBase) -> DigitSet {
    let modulus_inv = match base {
        DigitBase::A => m.a.inverse().expect("nonsingular"),
        DigitBase::B => m.b_inv.clone(),
    };
    let mut set = DigitSet { base, modulus_inv, digits: Vec::new() };
    let a = m.det_abs as i64;
    let total = (m.det_abs as usize).pow(m.n as u32);
    let mut point = vec![0i64; m.n];
    for idx in 0..total {
        let mut rest = idx;
        for coord in point.iter_mut() {
            *coord = (rest % m.det_abs as usize) as i64;
            rest /= m.det_abs as usize;
        }
        if !set.digits.iter().any(|d| set.congruent(&point, d)) {
            set.digits.push(point.clone());
            if set.digits.len() as i64 == a {
                break;
            }
        }
    }
    set
}

/// `max{ r >= 0 : k in B^r Z^n }`.
pub fn ord_b(m: &DilationMatrix, k: &[i64]) -> Result<u32> {
    if k.len() != m.n {
        return Err(Error::DimensionMismatch { expected: m.n, found: k.len() });
    }
    if k.iter().all(|&x| x == 0) {
        return Err(Error::ZeroVector);
    }
    let mut x: Vec<Rational> = k.iter().map(|&v| rational::int(v)).collect();
    let mut r = 0;
    loop {
        let next = m.b_inv.mul_vec(&x);
        if !next.iter().all(rational::is_integer) {
            return Ok(r);
        }
        x = next;
        r += 1;
    }
}

/// `k_r = B^r delta`, with `delta` the first nonzero digit of the `B` digit set.
pub fn choose_kr(m: &DilationMatrix, r: u32) -> Vec<i64> {
    let digits = digit_set_b(m);
    let delta = digits.digits().iter().find(|d| d.iter().any(|&x| x != 0)).expect("a >= 2 guarantees a nonzero digit");
    m.apply_b_int(r, delta)
}

/// Exact value of a sum of roots of unity `sum_t c_t zeta^t`, `zeta = e^(-2 pi i / N)`,
/// reduced modulo the cyclotomic polynomial `Phi_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterSum {
    /// Common order `N` of all phases.
    pub order: u64,
    /// Phase (in turns, reduced to `[0, 1)`) with multiplicity.
    pub phases: BTreeMap<Rational, u64>,
    /// Coefficients of the canonical representative in the power basis
    /// `1, zeta, ..., zeta^(phi(N) - 1)`.
    pub reduced: Vec<BigInt>,
}

impl CharacterSum {
    pub fn is_zero(&self) -> bool {
        self.reduced.iter().all(Zero::is_zero)
    }

    /// The value when it is an integer (the remainder is a constant).
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.reduced.iter().skip(1).all(Zero::is_zero) {
            Some(self.reduced.first().cloned().unwrap_or_else(BigInt::zero))
        } else {
            None
        }
    }
}

/// `sum_{mu in K_M} exp(-2 pi i <M^(-1) mu, nu>)` for the time-domain matrix `A`.
pub fn character_sum(m: &DilationMatrix, digits: &DigitSet, nu: &[i64]) -> Result<CharacterSum> {
    if nu.len() != m.n {
        return Err(Error::DimensionMismatch { expected: m.n, found: nu.len() });
    }
    let inv = m.a.inverse().expect("nonsingular");
    let nu_q: Vec<Rational> = nu.iter().map(|&x| rational::int(x)).collect();
    let mut phases: BTreeMap<Rational, u64> = BTreeMap::new();
    for mu in digits.digits() {
        let mu_q: Vec<Rational> = mu.iter().map(|&x| rational::int(x)).collect();
        let theta = rational::dot(&inv.mul_vec(&mu_q), &nu_q);
        let frac = &theta - theta.floor();
        *phases.entry(frac).or_insert(0) += 1;
    }
    let order = phases.keys().map(|p| p.denom().to_u64().expect("small denominators")).fold(1u64, num_integer::lcm);
    let mut poly = vec![BigInt::zero(); order as usize];
    for (phase, count) in &phases {
        let t = (phase * Rational::from_integer(BigInt::from(order))).to_integer();
        let t = t.to_usize().expect("index fits");
        poly[t] += BigInt::from(*count);
    }
    let reduced = poly_rem(&poly, &cyclotomic(order));
    Ok(CharacterSum { order, phases, reduced })
}

/// `Phi_n` with integer coefficients, lowest degree first.
pub fn cyclotomic(n: u64) -> Vec<BigInt> {
    // x^n - 1 = prod_{d | n} Phi_d(x)
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = poly_div_exact(&num, &cyclotomic(d));
        }
    }
    num
}

fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = &den[dd];
    let mut quot = vec![BigInt::zero(); rem.len().saturating_sub(dd).max(1)];
    for i in (dd..rem.len()).rev() {
        if rem[i].is_zero() {
            continue;
        }
        let c = &rem[i] / lead;
        for (j, dcoef) in den.iter().enumerate() {
            rem[i - dd + j] -= &c * dcoef;
        }
        quot[i - dd] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact cyclotomic division");
    quot
}

/// Remainder of `num` modulo the monic polynomial `den`.
fn poly_rem(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        rem.resize(dd.max(1), BigInt::zero());
        return rem;
    }
    for i in (dd..rem.len()).rev() {
        if rem[i].is_zero() {
            continue;
        }
        let c = rem[i].clone();
        for (j, dcoef) in den.iter().enumerate() {
            rem[i - dd + j] -= &c * dcoef;
        }
    }
    rem.truncate(dd.max(1));
    rem
}
