//! Dense two-phase simplex for the small linear programs behind polyhedral
//! norms and hull-membership tests.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let rhs = self.rhs();
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for j in 0..=rhs {
                    row[j] -= f * pivot_row[j];
                }
                row[col] = 0.0;
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for j in 0..=rhs {
                self.obj[j] -= f * pivot_row[j];
            }
            self.obj[col] = 0.0;
        }
        self.basis[r] = col;
    }

    /// Runs Bland's rule over the columns `0..active` until optimal.
    /// Returns `false` when the objective is unbounded below.
    fn run(&mut self, active: usize) -> bool {
        let rhs = self.rhs();
        loop {
            let entering = (0..active).find(|&j| self.obj[j] < -PIVOT_EPS);
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a > PIVOT_EPS {
                    let ratio = row[rhs] / a;
                    match best {
                        None => best = Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-14
                                || (ratio <= br + 1e-14 && self.basis[i] < self.basis[bi])
                            {
                                best = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

/// Minimizes `c·x` subject to `A x = b`, `x ≥ 0`; `a` is given by rows.
pub(crate) fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut t = vec![0.0; width + 1];
        for (j, v) in row.iter().enumerate() {
            t[j] = sign * v;
        }
        t[n + i] = 1.0;
        t[width] = sign * b[i];
        rows.push(t);
    }
    // phase one: minimize the sum of artificials
    let mut obj = vec![0.0; width + 1];
    for j in n..width {
        obj[j] = 1.0;
    }
    for row in &rows {
        for j in 0..=width {
            obj[j] -= row[j];
        }
    }
    for j in n..width {
        obj[j] = 0.0;
    }
    let mut tab = Tableau {
        rows,
        obj,
        basis: (n..width).collect(),
        width,
    };
    tab.run(width);
    let infeasibility = -tab.obj[width];
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if infeasibility > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }
    // drive remaining artificials out of the basis
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| tab.rows[r][j].abs() > 1e-9) {
                tab.pivot(r, col);
            }
        }
    }
    // phase two
    let mut obj = vec![0.0; width + 1];
    obj[..n].copy_from_slice(c);
    for (r, &bcol) in tab.basis.iter().enumerate() {
        if bcol < n {
            let f = obj[bcol];
            if f != 0.0 {
                for j in 0..=width {
                    obj[j] -= f * tab.rows[r][j];
                }
            }
        }
    }
    // artificial columns are frozen: never allow them to re-enter
    for j in n..width {
        obj[j] = 0.0;
    }
    tab.obj = obj;
    if !tab.run(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (r, &bcol) in tab.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = tab.rows[r][width];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { value, x }
}

/// Minkowski functional of `conv(points)` at `x`: the least `t ≥ 0` with
/// `x ∈ t·conv(points)`, assuming the hull contains the origin. `None` when
/// `x` is outside the cone spanned by `points`.
pub(crate) fn gauge(points: &[Vec<f64>], x: &[f64]) -> Option<f64> {
    let d = x.len();
    if x.iter().all(|v| *v == 0.0) {
        return Some(0.0);
    }
    if points.is_empty() {
        return None;
    }
    let a: Vec<Vec<f64>> = (0..d)
        .map(|i| points.iter().map(|p| p[i]).collect())
        .collect();
    let c = vec![1.0; points.len()];
    match minimize(&c, &a, x) {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_program() {
        // min -x - y  s.t. x + s1 = 1, y + s2 = 2
        let c = [-1.0, -1.0, 0.0, 0.0];
        let a = vec![vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, 1.0]];
        match minimize(&c, &a, &[1.0, 2.0]) {
            LpOutcome::Optimal { value, x } => {
                assert!((value + 3.0).abs() < 1e-12);
                assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![vec![1.0, 1.0]];
        assert_eq!(minimize(&[1.0, 1.0], &a, &[-1.0]), LpOutcome::Infeasible);
        let a = vec![vec![1.0, -1.0]];
        assert_eq!(minimize(&[-1.0, 0.0], &a, &[1.0]), LpOutcome::Unbounded);
    }

    #[test]
    fn gauge_of_cross_polytope_is_l1() {
        let pts = vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ];
        let g = gauge(&pts, &[1.0, -2.0]).unwrap();
        assert!((g - 3.0).abs() < 1e-12);
        assert_eq!(gauge(&pts[..2], &[0.0, 1.0]), None);
    }
}
