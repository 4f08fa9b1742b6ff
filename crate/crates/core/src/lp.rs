//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Problems are small (a few dozen constraints), so a full tableau is fine.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

/// One constraint `<a, x> <= b`.
pub type Row = (Vec<Rational>, Rational);

/// Maximize `<c, x>` subject to `A x <= b` with `x` free.
pub fn maximize(c: &[Rational], rows: &[Row]) -> LpOutcome {
    let n = c.len();
    let m = rows.len();
    // Columns: u (n), v (n), slack (m), artificial (per negative rhs), rhs.
    let needs_art: Vec<bool> = rows.iter().map(|(_, b)| b.is_negative()).collect();
    let n_art = needs_art.iter().filter(|&&x| x).count();
    let n_cols = 2 * n + m + n_art;
    let rhs = n_cols;
    let mut t = vec![vec![Rational::zero(); n_cols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut art = 2 * n + m;
    for (i, (a, b)) in rows.iter().enumerate() {
        debug_assert_eq!(a.len(), n);
        let sign = if needs_art[i] { -Rational::one() } else { Rational::one() };
        for j in 0..n {
            t[i][j] = &sign * &a[j];
            t[i][n + j] = -&sign * &a[j];
        }
        t[i][2 * n + i] = sign.clone();
        t[i][rhs] = &sign * b;
        if needs_art[i] {
            t[i][art] = Rational::one();
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = 2 * n + i;
        }
    }

    let mut allowed = n_cols;
    if n_art > 0 {
        // Phase 1: maximize -(sum of artificials).
        let mut obj = vec![Rational::zero(); n_cols + 1];
        for v in &mut obj[2 * n + m..n_cols] {
            *v = Rational::one();
        }
        price_out(&t, &basis, &mut obj);
        if !run(&mut t, &mut basis, &mut obj, n_cols) {
            unreachable!("phase one is bounded");
        }
        // The objective row carries the current value of -(sum of artificials).
        if obj[rhs].is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis.
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= 2 * n + m {
                if let Some(j) = (0..2 * n + m).find(|&j| !t[i][j].is_zero()) {
                    pivot(&mut t, &mut basis, None, i, j);
                } else {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        allowed = 2 * n + m;
    }

    let mut obj = vec![Rational::zero(); n_cols + 1];
    for j in 0..n {
        obj[j] = -&c[j];
        obj[n + j] = c[j].clone();
    }
    price_out(&t, &basis, &mut obj);
    if !run(&mut t, &mut basis, &mut obj, allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] += &t[i][rhs];
        } else if bv < 2 * n {
            x[bv - n] -= &t[i][rhs];
        }
    }
    let value = obj[rhs].clone();
    LpOutcome::Optimal { x, value }
}

/// Objective row in the form `z - sum c_j x_j = 0`; make basic columns zero.
fn price_out(t: &[Vec<Rational>], basis: &[usize], obj: &mut [Rational]) {
    for (i, &bv) in basis.iter().enumerate() {
        if obj[bv].is_zero() {
            continue;
        }
        let f = obj[bv].clone();
        for (o, v) in obj.iter_mut().zip(&t[i]) {
            if !v.is_zero() {
                *o -= &f * v;
            }
        }
    }
}

/// Returns false when unbounded.
fn run(t: &mut [Vec<Rational>], basis: &mut [usize], obj: &mut [Rational], allowed: usize) -> bool {
    let rhs = obj.len() - 1;
    loop {
        // Bland: lowest-index improving column.
        let Some(enter) = (0..allowed).find(|&j| obj[j].is_negative()) else {
            return true;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..t.len() {
            let coef = &t[i][enter];
            if !coef.is_positive() {
                continue;
            }
            let ratio = &t[i][rhs] / coef;
            leave = match leave {
                None => Some((i, ratio)),
                Some((li, lr)) => {
                    if ratio < lr || (ratio == lr && basis[i] < basis[li]) {
                        Some((i, ratio))
                    } else {
                        Some((li, lr))
                    }
                }
            };
        }
        let Some((row, _)) = leave else {
            return false;
        };
        pivot(t, basis, Some(obj), row, enter);
    }
}

fn pivot(t: &mut [Vec<Rational>], basis: &mut [usize], obj: Option<&mut [Rational]>, row: usize, col: usize) {
    let p = t[row][col].recip();
    for v in t[row].iter_mut() {
        if !v.is_zero() {
            *v *= &p;
        }
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
    if let Some(obj) = obj {
        if !obj[col].is_zero() {
            let f = obj[col].clone();
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
    }
    basis[row] = col;
}

/// Maximizes the minimum slack `t` over `A x + t <= b` (capped at `t <= 1`).
/// Returns the point and slack, or `None` when the system is infeasible.
/// A positive slack certifies a nonempty interior.
pub fn max_min_slack(rows: &[Row], n: usize) -> Option<(Vec<Rational>, Rational)> {
    let mut ext: Vec<Row> = rows
        .iter()
        .map(|(a, b)| {
            let mut a2 = a.clone();
            a2.push(Rational::one());
            (a2, b.clone())
        })
        .collect();
    let mut cap = vec![Rational::zero(); n + 1];
    cap[n] = Rational::one();
    ext.push((cap, Rational::one()));
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = Rational::one();
    match maximize(&c, &ext) {
        LpOutcome::Optimal { mut x, value } => {
            x.truncate(n);
            Some((x, value))
        }
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("slack is capped"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn row(a: &[i64], b: Rational) -> Row {
        (a.iter().map(|&x| int(x)).collect(), b)
    }

    #[test]
    fn simple_box_maximum() {
        // maximize x + y on [0,1] x [0,2]
        let rows = vec![row(&[1, 0], int(1)), row(&[-1, 0], int(0)), row(&[0, 1], int(2)), row(&[0, -1], int(0))];
        match maximize(&[int(1), int(1)], &rows) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, int(3));
                assert_eq!(x, vec![int(1), int(2)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // x >= 2, x <= 3, minimize x
        let rows = vec![row(&[-1], int(-2)), row(&[1], int(3))];
        match maximize(&[int(-1)], &rows) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(-2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let rows = vec![row(&[1], int(0)), row(&[-1], int(-1))];
        assert_eq!(maximize(&[int(1)], &rows), LpOutcome::Infeasible);
        let rows = vec![row(&[-1], int(0))];
        assert_eq!(maximize(&[int(1)], &rows), LpOutcome::Unbounded);
    }

    #[test]
    fn slack_detects_touching_intervals() {
        // [0,1] intersect [1,2] touches at a point: zero slack.
        let rows = vec![row(&[1], int(1)), row(&[-1], int(0)), row(&[1], int(2)), row(&[-1], int(-1))];
        let (_, t) = max_min_slack(&rows, 1).unwrap();
        assert_eq!(t, int(0));
        let rows = vec![row(&[1], int(1)), row(&[-1], int(0)), row(&[1], int(2)), row(&[-1], ratio(-1, 2))];
        let (_, t) = max_min_slack(&rows, 1).unwrap();
        assert_eq!(t, ratio(1, 4));
    }

    #[test]
    fn degenerate_cycling_prone_problem_terminates() {
        // Beale's classic cycling example (maximize form).
        let rows = vec![
            (vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], int(0)),
            (vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], int(0)),
            (vec![int(0), int(0), int(1), int(0)], int(1)),
            (vec![int(-1), int(0), int(0), int(0)], int(0)),
            (vec![int(0), int(-1), int(0), int(0)], int(0)),
            (vec![int(0), int(0), int(-1), int(0)], int(0)),
            (vec![int(0), int(0), int(0), int(-1)], int(0)),
        ];
        let c = vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)];
        match maximize(&c, &rows) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
