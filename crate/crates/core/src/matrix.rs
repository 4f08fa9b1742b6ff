//! Dense exact rational matrices. Small (n <= 8) by construction.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| rational::int(v)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| rational::dot(self.row(i), v)).collect()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// Determinant by Gaussian elimination over the rationals.
    pub fn det(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                a.swap_rows(pivot, col);
                det = -det;
            }
            let p = a[(col, col)].clone();
            det *= &p;
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &p;
                for c in col..n {
                    let v = &f * &a[(col, c)];
                    a[(r, c)] -= v;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            let p = a[(col, col)].recip();
            for c in 0..n {
                a[(col, c)] *= &p;
                inv[(col, c)] *= &p;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for c in 0..n {
                    let va = &f * &a[(col, c)];
                    a[(r, c)] -= va;
                    let vi = &f * &inv[(col, c)];
                    inv[(r, c)] -= vi;
                }
            }
        }
        Some(inv)
    }

    /// Solves `self * x = rhs` for square nonsingular `self`.
    pub fn solve(&self, rhs: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            a.swap_rows(pivot, col);
            b.swap(pivot, col);
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &a[(col, col)];
                for c in col..n {
                    let v = &f * &a[(col, c)];
                    a[(r, c)] -= v;
                }
                let v = &f * &b[col];
                b[r] -= v;
            }
        }
        let mut x = vec![Rational::zero(); n];
        for r in (0..n).rev() {
            let mut acc = b[r].clone();
            for c in r + 1..n {
                acc -= &a[(r, c)] * &x[c];
            }
            x[r] = acc / &a[(r, r)];
        }
        Some(x)
    }

    /// Integer power; negative exponents go through the exact inverse.
    pub fn pow(&self, exp: i32) -> Option<Matrix> {
        let base = if exp < 0 { self.inverse()? } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = Matrix::identity(self.rows);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Some(acc)
    }

    /// Induced l-infinity norm: maximum absolute row sum.
    pub fn row_norm(&self) -> Rational {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<Rational>())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(rational::is_integer)
    }

    /// Rank of the matrix (row echelon over Q).
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..self.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(pivot, rank);
            for r in rank + 1..self.rows {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &a[(rank, col)];
                for c in col..self.cols {
                    let v = &f * &a[(rank, c)];
                    a[(r, c)] -= v;
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> =
            (0..self.rows).map(|i| self.row(i).iter().map(|x| x.to_string()).collect()).collect();
        write!(f, "{rows:?}")
    }
}

/// Affine rank of a point cloud (dimension of its affine hull), `None` when empty.
pub fn affine_rank(points: &[&[Rational]]) -> Option<usize> {
    let (first, rest) = points.split_first()?;
    if rest.is_empty() {
        return Some(0);
    }
    let rows = rest.iter().map(|p| p.iter().zip(first.iter()).map(|(a, b)| a - b).collect()).collect();
    Some(Matrix::from_rows(rows).rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn quincunx_square_is_twice_identity() {
        let b = Matrix::from_int_rows(&[vec![1, 1], vec![1, -1]]);
        let b2 = b.pow(2).unwrap();
        assert_eq!(b2, Matrix::from_int_rows(&[vec![2, 0], vec![0, 2]]));
        let binv2 = b.pow(-2).unwrap();
        assert_eq!(binv2.row_norm(), ratio(1, 2));
        assert_eq!(b.det(), int(-2));
    }

    #[test]
    fn inverse_and_solve_agree() {
        let m = Matrix::from_int_rows(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(3));
        let rhs = vec![int(1), int(2), int(3)];
        assert_eq!(m.solve(&rhs).unwrap(), inv.mul_vec(&rhs));
        assert!(Matrix::from_int_rows(&[vec![1, 2], vec![2, 4]]).inverse().is_none());
    }

    #[test]
    fn rank_and_affine_rank() {
        let m = Matrix::from_int_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.rank(), 1);
        let p = [vec![int(0), int(0)], vec![int(1), int(1)], vec![int(2), int(2)]];
        let refs: Vec<&[Rational]> = p.iter().map(Vec::as_slice).collect();
        assert_eq!(affine_rank(&refs), Some(1));
    }
}
