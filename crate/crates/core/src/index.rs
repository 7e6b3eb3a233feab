//! Upper bounds for the numerical index `n(X) = inf {v(T) : ‖T‖ = 1}`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{capability, Result};
use crate::numrange::{geometry_radius, range_summary};
use crate::operators::{adjoint, Operator, DEFAULT_BUDGET};
use crate::polytope::{enumerate_vertices, Enumeration};
use crate::scalar::Scalar;
use crate::spaces::geometry::op_norm as geometry_op_norm;
use crate::spaces::{dual_space, Geometry, NormedSpace};

/// Shrinks of the pattern-search step.
pub const PATTERN_SHRINKS: usize = 40;
/// Starts kept for local descent.
const DESCENT_STARTS: usize = 4;
/// Objective evaluations allowed per descent.
const EVAL_CAP_SMALL: usize = 40_000;
const EVAL_CAP_LARGE: usize = 2_000;
/// Parameter count above which the large-dimension evaluation cap applies.
const LARGE_PARAMS: usize = 64;
/// Largest polytope handled by the exact two-dimensional mode.
pub const EXACT_MAX_VERTICES: u128 = 8;

/// Result of [`numerical_index_estimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct IndexReport<S: Scalar> {
    /// Best `v(T)/‖T‖` found; an upper bound for `n(X)`.
    pub upper: f64,
    /// Equal to `upper`; the infimum may be lower unless `exact`.
    pub estimate: f64,
    /// Operator attaining `upper`, normalized to `‖witness‖ = 1`.
    pub witness: Operator<S>,
    /// `true` when the value is certified (small polygons).
    pub exact: bool,
    /// Number of accepted improvements during local descent.
    pub trace_len: usize,
    pub evaluations: usize,
}

struct Objective<'a> {
    g: &'a Geometry,
    budget: usize,
    evals: usize,
}

impl Objective<'_> {
    fn value<S: Scalar>(&mut self, m: &DMatrix<S>) -> Result<f64> {
        self.evals += 1;
        let n = geometry_op_norm(self.g, self.g, m, self.budget).value;
        if n <= 1e-300 {
            return Ok(f64::INFINITY);
        }
        Ok(geometry_radius(self.g, m, self.budget)?.0 / n)
    }
}

fn params_of<S: Scalar>(m: &DMatrix<S>) -> Vec<f64> {
    let mut out = Vec::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(m[(r, c)].real());
            if S::IS_COMPLEX {
                out.push(m[(r, c)].imaginary());
            }
        }
    }
    out
}

fn matrix_of<S: Scalar>(p: &[f64], d: usize) -> DMatrix<S> {
    let w = if S::IS_COMPLEX { 2 } else { 1 };
    DMatrix::from_fn(d, d, |r, c| {
        let k = (r * d + c) * w;
        if S::IS_COMPLEX {
            S::from_parts(p[k], p[k + 1])
        } else {
            S::from_real(p[k])
        }
    })
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// `(value, params)` ordering with lexicographic tie-break.
fn better(a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> bool {
    if (a.0 - b.0).abs() > 1e-12 {
        return a.0 < b.0;
    }
    lex(&a.1, &b.1) == Ordering::Less
}

/// Above this dimension the pair families only use neighbouring coordinates.
const STRUCTURED_FULL_DIM: usize = 16;

fn structured_starts<S: Scalar>(d: usize) -> Vec<DMatrix<S>> {
    let mut out = Vec::new();
    let one = S::one();
    let near = |i: usize, j: usize| d <= STRUCTURED_FULL_DIM || i.abs_diff(j) == 1;
    for i in 0..d {
        for j in 0..d {
            if !near(i, j) {
                continue;
            }
            if i < j {
                let mut m = DMatrix::zeros(d, d);
                m[(i, j)] = one;
                m[(j, i)] = -one;
                out.push(m);
            }
            if i != j {
                let mut m = DMatrix::zeros(d, d);
                m[(i, j)] = one;
                out.push(m);
            }
        }
    }
    // signed permutations: transpositions and the cyclic shift, with a sign flip
    for i in 0..d {
        for j in (i + 1..d).filter(|&j| near(i, j)) {
            for s in [one, -one] {
                let mut m = DMatrix::identity(d, d);
                m[(i, i)] = S::zero();
                m[(j, j)] = S::zero();
                m[(i, j)] = one;
                m[(j, i)] = s;
                out.push(m);
            }
        }
    }
    if d > 1 {
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            m[((i + 1) % d, i)] = if i == 0 { -one } else { one };
        }
        out.push(m);
        let mut m = DMatrix::identity(d, d);
        m[(0, 0)] = -one;
        out.push(m);
    }
    out.push(DMatrix::identity(d, d));
    out
}

/// Exact index of a small real polygon (or segment): `n = 1/max‖T‖` over
/// the vertices of the polytope `{T : |x*(Tx)| ≤ 1 for all extreme pairs}`.
fn exact_polygon(g: &Geometry, budget: usize) -> Result<(f64, DMatrix<f64>)> {
    let d = g.dim();
    let (pairs, _) = g.pairs::<f64>(budget, &[])?;
    let mut rows = Vec::with_capacity(2 * pairs.len());
    for (x, f) in &pairs {
        let mut a = vec![0.0; d * d];
        for r in 0..d {
            for c in 0..d {
                a[r * d + c] = f[r] * x[c];
            }
        }
        rows.push(a.iter().map(|v| -v).collect());
        rows.push(a);
    }
    match enumerate_vertices(&rows, d * d) {
        Enumeration::Unbounded(dir) => {
            let m = DMatrix::from_fn(d, d, |r, c| dir[r * d + c]);
            let n = geometry_op_norm(g, g, &m, budget).value;
            Ok((0.0, m / n))
        }
        Enumeration::Bounded(verts) => {
            let mut best = (0.0, DMatrix::identity(d, d));
            for v in verts {
                let m = DMatrix::from_fn(d, d, |r, c| v[r * d + c]);
                let n = geometry_op_norm(g, g, &m, budget).value;
                if n > best.0 + 1e-12 {
                    best = (n, m);
                }
            }
            let n = best.0;
            Ok((1.0 / n, best.1 / n))
        }
    }
}

fn descend<S: Scalar>(
    obj: &mut Objective,
    d: usize,
    start: (f64, Vec<f64>),
    cap: usize,
) -> Result<((f64, Vec<f64>), usize)> {
    let (mut fx, mut x) = start;
    let mut improvements = 0;
    let used0 = obj.evals;
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
    let mut h = 0.5 * scale;
    'outer: for _ in 0..=PATTERN_SHRINKS {
        if fx <= 1e-15 {
            break;
        }
        loop {
            let mut improved = false;
            for i in 0..x.len() {
                for s in [h, -h] {
                    if obj.evals - used0 >= cap {
                        break 'outer;
                    }
                    x[i] += s;
                    let f = obj.value(&matrix_of::<S>(&x, d))?;
                    if f < fx - 1e-15 {
                        fx = f;
                        improved = true;
                        improvements += 1;
                        break;
                    }
                    x[i] -= s;
                }
            }
            if !improved {
                break;
            }
        }
        h *= 0.5;
    }
    Ok(((fx, x), improvements))
}

fn search<S: Scalar>(g: &Geometry, budget: usize, seed: u64) -> Result<(f64, DMatrix<S>, bool, usize, usize)> {
    let d = g.dim();
    if g.has_smooth_leaf() {
        return Err(capability(
            "numerical index search needs exact ranges; smooth non-Euclidean norms are sampled only",
        ));
    }
    if !S::IS_COMPLEX && g.is_polyhedral() && d <= 2 {
        if let Some(c) = g.ext_count() {
            if c <= EXACT_MAX_VERTICES {
                let (v, m) = exact_polygon(g, budget)?;
                return Ok((v, m.map(S::from_real), true, 0, 0));
            }
        }
    }
    let mut obj = Objective { g, budget, evals: 0 };
    let mut candidates: Vec<DMatrix<S>> = structured_starts(d);
    if let Geometry::Sum(s) = g {
        for (i, part) in s.parts.iter().enumerate() {
            let (_, w, _, _, _) = search::<S>(part, budget, seed.wrapping_add(i as u64 + 1))?;
            let mut m = DMatrix::zeros(d, d);
            let o = s.offsets[i];
            m.view_mut((o, o), (part.dim(), part.dim())).copy_from(&w);
            candidates.push(m);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let m = DMatrix::from_fn(d, d, |_, _| {
            let re = rng.gen_range(-1.0..=1.0);
            let im = if S::IS_COMPLEX { rng.gen_range(-1.0..=1.0) } else { 0.0 };
            S::from_parts(re, im)
        });
        candidates.push(m);
    }
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::with_capacity(candidates.len());
    for m in candidates {
        let n = geometry_op_norm(g, g, &m, budget).value;
        if n <= 1e-300 {
            continue;
        }
        let m = m.unscale(n);
        let f = obj.value(&m)?;
        scored.push((f, params_of(&m)));
    }
    scored.sort_by(|a, b| {
        if better(a, b) {
            Ordering::Less
        } else if better(b, a) {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    });
    let nparams = scored.first().map(|s| s.1.len()).unwrap_or(0);
    let cap = if nparams > LARGE_PARAMS {
        EVAL_CAP_LARGE
    } else {
        EVAL_CAP_SMALL
    };
    let mut best = scored[0].clone();
    let mut trace = 0;
    for start in scored.into_iter().take(DESCENT_STARTS) {
        let (res, imp) = descend::<S>(&mut obj, d, start, cap)?;
        trace += imp;
        if better(&res, &best) {
            best = res;
        }
    }
    let m = matrix_of::<S>(&best.1, d);
    let n = geometry_op_norm(g, g, &m, budget).value;
    let m = m.unscale(n);
    let value = obj.value(&m)?;
    Ok((value, m, false, trace, obj.evals))
}

/// Multi-start search for `inf v(T)/‖T‖`. `budget` random starts are drawn
/// from a generator seeded with `seed`, alongside structured candidates and
/// embedded witnesses of the summands.
pub fn numerical_index_estimate<S: Scalar>(
    space: &NormedSpace,
    budget: usize,
    seed: u64,
) -> Result<IndexReport<S>> {
    space.check_scalar::<S>()?;
    let g = space.geometry();
    let (value, m, exact, trace_len, evaluations) = search::<S>(g, budget.max(1), seed)?;
    // n(X) ≥ 0, so an exactly evaluated upper bound of 0 is the index
    let at_bound = value <= 0.0;
    Ok(IndexReport {
        upper: value,
        estimate: value,
        witness: Operator::on(space, m)?,
        exact: exact || at_bound,
        trace_len,
        evaluations,
    })
}

/// Result of [`verify_dual_inequality`].
#[derive(Clone, Debug, PartialEq)]
pub struct DualCheckReport {
    pub trials: usize,
    /// Trials where both radii were exact and therefore compared.
    pub checked: usize,
    /// Checked trials with `|v(T) − v(T*)| > 1e-9`.
    pub violations: usize,
    pub max_discrepancy: f64,
    pub primal_estimate: f64,
    pub dual_estimate: f64,
    /// `dual_estimate ≤ primal_estimate + 2e-2`.
    pub inequality_holds: bool,
}

/// Tolerance on `v(T) = v(T*)`.
pub const RADIUS_IDENTITY_TOL: f64 = 1e-9;
/// Slack allowed between the two index searches.
pub const INDEX_SLACK: f64 = 2e-2;

/// Compares `v(T)` with `v(T*)` on random operators and the index estimates
/// of `X` and `X*`.
pub fn verify_dual_inequality(space: &NormedSpace, trials: usize, seed: u64) -> Result<DualCheckReport> {
    if space.is_complex() {
        return verify_dual_inequality_impl::<num_complex::Complex64>(space, trials, seed);
    }
    verify_dual_inequality_impl::<f64>(space, trials, seed)
}

fn verify_dual_inequality_impl<S: Scalar>(space: &NormedSpace, trials: usize, seed: u64) -> Result<DualCheckReport> {
    let dual = dual_space(space)?;
    let d = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut violations = 0;
    let mut max_discrepancy: f64 = 0.0;
    for _ in 0..trials {
        let m = DMatrix::from_fn(d, d, |_, _| {
            let re = rng.gen_range(-1.0..=1.0);
            let im = if S::IS_COMPLEX { rng.gen_range(-1.0..=1.0) } else { 0.0 };
            S::from_parts(re, im)
        });
        let t = Operator::on(space, m)?;
        let a = adjoint(&t)?;
        let r1 = range_summary(space, &t, DEFAULT_BUDGET)?;
        let r2 = range_summary(&dual, &a, DEFAULT_BUDGET)?;
        if r1.exact && r2.exact {
            checked += 1;
            let gap = (r1.radius - r2.radius).abs();
            max_discrepancy = max_discrepancy.max(gap);
            if gap > RADIUS_IDENTITY_TOL {
                violations += 1;
            }
        }
    }
    let p = numerical_index_estimate::<S>(space, DEFAULT_BUDGET, seed)?;
    let q = numerical_index_estimate::<S>(&dual, DEFAULT_BUDGET, seed)?;
    Ok(DualCheckReport {
        trials,
        checked,
        violations,
        max_discrepancy,
        primal_estimate: p.estimate,
        dual_estimate: q.estimate,
        inequality_holds: q.estimate <= p.estimate + INDEX_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::op_norm;
    use crate::scalar::Field;
    use crate::structure::l1_sum;
    use num_complex::Complex64;

    fn sp(p: f64, n: usize) -> NormedSpace {
        NormedSpace::lp(Field::Real, p, n).unwrap()
    }

    #[test]
    fn classical_values() {
        let r = numerical_index_estimate::<f64>(&sp(1.0, 2), 16, 0).unwrap();
        assert!(r.exact && (r.upper - 1.0).abs() < 1e-9, "{r:?}");
        let r = numerical_index_estimate::<f64>(&sp(f64::INFINITY, 2), 16, 0).unwrap();
        assert!((r.upper - 1.0).abs() < 1e-9);
        let r = numerical_index_estimate::<f64>(&sp(2.0, 2), 16, 0).unwrap();
        assert!(r.upper < 1e-12);
        let w = r.witness.matrix();
        assert!((w + w.transpose()).norm() < 1e-12);
        let c = NormedSpace::lp(Field::Complex, 2.0, 2).unwrap();
        let r = numerical_index_estimate::<Complex64>(&c, 8, 0).unwrap();
        assert!((r.upper - 0.5).abs() < 1e-2, "{}", r.upper);
        assert!((op_norm(&r.witness).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hexagon_is_exact() {
        let h = NormedSpace::polyhedral(vec![
            vec![1.0, 0.0],
            vec![0.5, libm::sqrt(3.0) / 2.0],
            vec![-0.5, libm::sqrt(3.0) / 2.0],
        ])
        .unwrap();
        let r = numerical_index_estimate::<f64>(&h, 8, 0).unwrap();
        assert!(r.exact);
        let s = range_summary(&h, &r.witness, 8).unwrap();
        assert!((s.radius - r.upper).abs() < 1e-9);
        assert!(r.upper > 0.0 && r.upper < 1.0);
    }

    #[test]
    fn sum_with_euclidean_part_has_zero_index() {
        let s = l1_sum(vec![sp(2.0, 2), sp(1.0, 2)]).unwrap();
        let r = numerical_index_estimate::<f64>(&s, 8, 0).unwrap();
        assert!(r.upper < 1e-12);
    }

    #[test]
    fn smooth_norms_are_refused() {
        assert!(numerical_index_estimate::<f64>(&sp(3.0, 2), 8, 0).is_err());
    }

    #[test]
    fn dual_check_on_l1() {
        let r = verify_dual_inequality(&sp(1.0, 3), 50, 1).unwrap();
        assert_eq!(r.checked, 50);
        assert_eq!(r.violations, 0);
        assert!(r.inequality_holds);
    }
}
