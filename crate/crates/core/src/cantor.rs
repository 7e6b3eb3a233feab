//! Piecewise-linear functions on a uniform grid of `[0, 1]` whose values on
//! the level-`k` Cantor nodes lie in a prescribed subspace `E`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{construction, precondition, Result};
use crate::index::numerical_index_estimate;
use crate::lie::{default_rho_grid, lie_algebra_basis, semigroup_verify, DEFAULT_LIE_TOL};
use crate::linalg::rank_of_rows;
use crate::operators::Operator;
use crate::scalar::Field;
use crate::spaces::{dual_norm, norm, NormedSpace};
use crate::structure::{extend_by_zero, l1_sum};

/// Grid `{i/m}` split into nodes of the closed level-`k` Cantor set and the
/// remaining gap nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct CantorGrid {
    pub level: u32,
    pub m: u64,
    pub nodes: Vec<f64>,
    /// Grid indices of nodes in `C_k`, increasing.
    pub cantor_nodes: Vec<usize>,
    /// Grid indices of the other nodes, increasing.
    pub gap_nodes: Vec<usize>,
}

/// Whether `a/b ∈ C_k`, by exact ternary digit iteration.
fn in_cantor(mut a: u64, b: u64, k: u32) -> bool {
    for _ in 0..k {
        let t = 3 * a;
        if b < t && t < 2 * b {
            return false;
        }
        a = if t <= b { t } else { t - 2 * b };
    }
    true
}

/// The grid `{i/m : 0 ≤ i ≤ m}` classified against `C_k`; `m` must be a
/// positive multiple of `3^k`.
pub fn cantor_grid(k: u32, m: u64) -> Result<CantorGrid> {
    let p = 3u64
        .checked_pow(k)
        .ok_or_else(|| precondition("Cantor level too large"))?;
    if m == 0 || m % p != 0 {
        return Err(precondition("grid size must be a positive multiple of 3^k"));
    }
    let mut cantor_nodes = Vec::new();
    let mut gap_nodes = Vec::new();
    for i in 0..=m {
        if in_cantor(i, m, k) {
            cantor_nodes.push(i as usize);
        } else {
            gap_nodes.push(i as usize);
        }
    }
    Ok(CantorGrid {
        level: k,
        m,
        nodes: (0..=m).map(|i| i as f64 / m as f64).collect(),
        cantor_nodes,
        gap_nodes,
    })
}

impl CantorGrid {
    /// Open intervals removed up to level `k`, as `(lo, hi)`.
    pub fn removed_intervals(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut segs = vec![(0.0f64, 1.0f64)];
        for _ in 0..self.level {
            let mut next = Vec::with_capacity(2 * segs.len());
            for (a, b) in segs {
                let w = (b - a) / 3.0;
                out.push((a + w, b - w));
                next.push((a, a + w));
                next.push((b - w, b));
            }
            segs = next;
        }
        out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));
        out
    }

    /// Maximal runs of consecutive gap nodes, as grid index ranges.
    pub fn gap_runs(&self) -> Vec<core::ops::Range<usize>> {
        let mut runs: Vec<core::ops::Range<usize>> = Vec::new();
        for &i in &self.gap_nodes {
            match runs.last_mut() {
                Some(r) if r.end == i => r.end = i + 1,
                _ => runs.push(i..i + 1),
            }
        }
        runs
    }
}

/// The space `X(E)`: coordinates are the `E`-coefficients followed by the
/// values at the gap nodes; the norm is the maximum over all grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct PlSpace {
    pub grid: CantorGrid,
    /// One row per Cantor node, one column per basis function of `E`.
    pub e_basis: Vec<Vec<f64>>,
    pub e_dim: usize,
    pub space: NormedSpace,
}

/// Builds `X(E)` for `E = span(columns of e_basis)` on the Cantor nodes.
#[allow(non_snake_case)]
pub fn build_XE(grid: &CantorGrid, e_basis: &[Vec<f64>]) -> Result<PlSpace> {
    if e_basis.len() != grid.cantor_nodes.len() {
        return Err(construction("E basis needs one row per Cantor node"));
    }
    let e_dim = e_basis.first().map(Vec::len).unwrap_or(0);
    if e_basis.iter().any(|r| r.len() != e_dim) {
        return Err(construction("E basis rows are ragged"));
    }
    if e_dim > 0 && rank_of_rows(e_basis, e_dim) < e_dim {
        return Err(construction("E basis does not have full column rank"));
    }
    let g = grid.gap_nodes.len();
    let dim = e_dim + g;
    if dim == 0 {
        return Err(construction("X(E) is the zero space"));
    }
    let mut rows = vec![vec![0.0; dim]; grid.nodes.len()];
    for (c, &i) in grid.cantor_nodes.iter().enumerate() {
        rows[i][..e_dim].copy_from_slice(&e_basis[c]);
    }
    for (j, &i) in grid.gap_nodes.iter().enumerate() {
        rows[i][e_dim + j] = 1.0;
    }
    let space = NormedSpace::sup_subspace(grid.nodes.clone(), rows)?;
    Ok(PlSpace {
        grid: grid.clone(),
        e_basis: e_basis.to_vec(),
        e_dim,
        space,
    })
}

impl PlSpace {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    fn basis_rows(&self) -> &[Vec<f64>] {
        match self.space.descriptor() {
            crate::spaces::Descriptor::SupSubspace { basis, .. } => basis,
            _ => unreachable!("X(E) is a sup-subspace"),
        }
    }

    /// Values of `x` at every grid node.
    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        self.basis_rows()
            .iter()
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Φ(x)`: the values at the Cantor nodes.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        let v = self.values(x);
        self.grid.cantor_nodes.iter().map(|&i| v[i]).collect()
    }

    /// Values on the Cantor nodes of the `E` element with coefficients `a`.
    pub fn e_values(&self, a: &[f64]) -> Vec<f64> {
        self.e_basis
            .iter()
            .map(|r| r.iter().zip(a).map(|(b, c)| b * c).sum())
            .collect()
    }

    /// Sup norm of an `E` element on the Cantor nodes.
    pub fn e_norm(&self, a: &[f64]) -> f64 {
        self.e_values(a).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Which `E` the experiment embeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EKind {
    /// Euclidean plane through the cosine–sine embedding.
    L2Plane,
    /// Constant functions.
    Constants,
}

impl EKind {
    pub fn name(self) -> &'static str {
        match self {
            EKind::L2Plane => "l2_2",
            EKind::Constants => "constants",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "l2_2" => Some(EKind::L2Plane),
            "constants" => Some(EKind::Constants),
            _ => None,
        }
    }
}

/// A basis of `ℓ₂^d` realized inside the sup-normed functions on `count`
/// nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct L2Embedding {
    pub basis: Vec<Vec<f64>>,
    /// Bound on the relative error between the induced sup norm and the
    /// Euclidean norm of the coefficients.
    pub error_bound: f64,
}

/// `f₁(tᵢ) = cos θᵢ`, `f₂(tᵢ) = sin θᵢ` with `θᵢ = iπ/count` for the plane;
/// the constant function for the line.
pub fn embed_l2_in_sup(dim2: bool, count: usize) -> Result<L2Embedding> {
    if count < 3 {
        return Err(precondition("the embedding needs at least three nodes"));
    }
    if !dim2 {
        return Ok(L2Embedding {
            basis: vec![vec![1.0]; count],
            error_bound: 0.0,
        });
    }
    let basis = (0..count)
        .map(|i| {
            let th = PI * i as f64 / count as f64;
            vec![libm::cos(th), libm::sin(th)]
        })
        .collect();
    let b = PI / (2.0 * count as f64);
    Ok(L2Embedding {
        basis,
        error_bound: b * b,
    })
}

/// `E` basis of the given kind on the Cantor nodes of `grid`.
pub fn e_basis_for(kind: EKind, grid: &CantorGrid) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = grid.cantor_nodes.len();
    match kind {
        EKind::Constants => Ok((vec![vec![1.0]; n], 0.0)),
        EKind::L2Plane => {
            let e = embed_l2_in_sup(true, n)?;
            Ok((e.basis, e.error_bound))
        }
    }
}

/// A hat function in `X(E)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    /// Grid index of the peak.
    pub node: usize,
    /// Coordinates in `X(E)`.
    pub coords: Vec<f64>,
    /// Values at every grid node.
    pub values: Vec<f64>,
}

/// A nonnegative norm-one hat in `X(E)` supported in the open interval `u`,
/// peaking at the gap node closest to its centre (lower node on ties).
pub fn urysohn_bump(xe: &PlSpace, u: (f64, f64)) -> Result<Bump> {
    let (lo, hi) = u;
    let nodes = &xe.grid.nodes;
    let centre = 0.5 * (lo + hi);
    let mut best: Option<(usize, usize, f64)> = None;
    for (j, &i) in xe.grid.gap_nodes.iter().enumerate() {
        if i == 0 || i + 1 >= nodes.len() {
            continue;
        }
        if !(lo < nodes[i - 1] && nodes[i + 1] < hi) {
            continue;
        }
        let dist = (nodes[i] - centre).abs();
        if best.map_or(true, |b| dist < b.2 - 1e-12) {
            best = Some((i, j, dist));
        }
    }
    let (i, j, _) = best.ok_or_else(|| {
        precondition("no gap node with both grid neighbours inside the interval at this resolution")
    })?;
    let mut coords = vec![0.0; xe.dim()];
    coords[xe.e_dim + j] = 1.0;
    let values = xe.values(&coords);
    Ok(Bump {
        node: i,
        coords,
        values,
    })
}

/// Result of [`quotient_isometry_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientReport {
    pub samples: usize,
    /// `max |‖f‖ − ‖g‖|` over the affine extensions.
    pub max_norm_gap: f64,
    /// Whether `Φ(f) = g` held bit for bit for every sample.
    pub restriction_exact: bool,
    /// `max ‖Φx‖` over random unit vectors of `X(E)`.
    pub phi_norm: f64,
    pub holds: bool,
}

/// Coordinates of the piecewise-linear extension of the `E` element with
/// coefficients `a`, interpolating linearly across each gap run.
pub fn affine_extension(xe: &PlSpace, a: &[f64]) -> Vec<f64> {
    let g = xe.e_values(a);
    let mut at = vec![0.0; xe.grid.nodes.len()];
    for (c, &i) in xe.grid.cantor_nodes.iter().enumerate() {
        at[i] = g[c];
    }
    let mut coords = Vec::with_capacity(xe.dim());
    coords.extend_from_slice(a);
    for run in xe.grid.gap_runs() {
        let (p, q) = (run.start - 1, run.end);
        for i in run {
            let s = (i - p) as f64 / (q - p) as f64;
            at[i] = at[p] + (at[q] - at[p]) * s;
        }
    }
    coords.extend(xe.grid.gap_nodes.iter().map(|&i| at[i]));
    coords
}

/// Checks both inclusions of `Φ(open unit ball of X(E)) = open unit ball of E`.
pub fn quotient_isometry_check(xe: &PlSpace, samples: &[Vec<f64>], tol: f64) -> Result<QuotientReport> {
    let mut max_norm_gap: f64 = 0.0;
    let mut restriction_exact = true;
    for a in samples {
        if a.len() != xe.e_dim {
            return Err(precondition("sample has the wrong number of E coefficients"));
        }
        let f = affine_extension(xe, a);
        let nf = norm(&xe.space, &f)?;
        let ng = xe.e_norm(a);
        max_norm_gap = max_norm_gap.max((nf - ng).abs());
        restriction_exact &= xe.restrict(&f) == xe.e_values(a);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut phi_norm: f64 = 0.0;
    for _ in 0..100 {
        let x: Vec<f64> = (0..xe.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = norm(&xe.space, &x)?;
        if n == 0.0 {
            continue;
        }
        let r = xe.restrict(&x);
        phi_norm = phi_norm.max(r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / n);
    }
    Ok(QuotientReport {
        samples: samples.len(),
        max_norm_gap,
        restriction_exact,
        phi_norm,
        holds: max_norm_gap <= tol && restriction_exact && phi_norm <= 1.0 + tol,
    })
}

/// Norm of one restricted evaluation functional.
#[derive(Clone, Debug, PartialEq)]
pub struct GapFunctional {
    pub node: usize,
    pub t: f64,
    pub norm: f64,
    /// A bump attains the value, certifying the lower bound.
    pub witnessed: bool,
}

/// Result of [`gap_functional_norms`].
#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub functionals: Vec<GapFunctional>,
    /// Every witnessed gap functional has norm `1 ± tol`.
    pub all_unit: bool,
    pub unit_count: usize,
    /// Fraction of grid nodes whose restricted evaluation is an extreme
    /// point of the dual ball.
    pub extreme_fraction: f64,
}

/// `‖δ_t|X(E)‖` for the gap nodes, and how many grid evaluations are
/// extreme in the dual ball.
pub fn gap_functional_norms(xe: &PlSpace, tol: f64) -> Result<GapReport> {
    let rows = xe.basis_rows().to_vec();
    let h = 1.0 / xe.grid.m as f64;
    let mut functionals = Vec::with_capacity(xe.grid.gap_nodes.len());
    for &i in &xe.grid.gap_nodes {
        let n = dual_norm(&xe.space, &rows[i])?;
        let t = xe.grid.nodes[i];
        let witnessed = match urysohn_bump(xe, (t - 1.5 * h, t + 1.5 * h)) {
            Ok(b) => b.node == i && b.values[i] == 1.0,
            Err(_) => false,
        };
        functionals.push(GapFunctional {
            node: i,
            t,
            norm: n,
            witnessed,
        });
    }
    let all_unit = functionals
        .iter()
        .filter(|f| f.witnessed)
        .all(|f| (f.norm - 1.0).abs() <= tol);
    let unit_count = functionals
        .iter()
        .filter(|f| (f.norm - 1.0).abs() <= tol)
        .count();
    let dual_ext = xe.space.geometry().dual_ext_points::<f64>(0).points;
    let extreme = rows
        .iter()
        .filter(|r| {
            dual_ext.iter().any(|e| {
                let same = e.iter().zip(r.iter()).all(|(a, b)| (a - b).abs() <= 1e-9);
                let opp = e.iter().zip(r.iter()).all(|(a, b)| (a + b).abs() <= 1e-9);
                same || opp
            })
        })
        .count();
    Ok(GapReport {
        functionals,
        all_unit,
        unit_count,
        extreme_fraction: extreme as f64 / rows.len() as f64,
    })
}

/// Number of test intervals in the bump coverage statistic.
pub const COVERAGE_INTERVALS: usize = 64;

/// Fraction of the intervals `(j/64, (j+1)/64)` meeting the removed set
/// that admit a bump at this resolution.
pub fn bump_coverage(xe: &PlSpace) -> f64 {
    let removed = xe.grid.removed_intervals();
    let mut meeting = 0;
    let mut covered = 0;
    for j in 0..COVERAGE_INTERVALS {
        let u = (
            j as f64 / COVERAGE_INTERVALS as f64,
            (j + 1) as f64 / COVERAGE_INTERVALS as f64,
        );
        if !removed.iter().any(|r| u.0 < r.1 && r.0 < u.1) {
            continue;
        }
        meeting += 1;
        if urysohn_bump(xe, u).is_ok() {
            covered += 1;
        }
    }
    if meeting == 0 {
        return 0.0;
    }
    covered as f64 / meeting as f64
}

/// One resolution of [`main_example_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub m: u64,
    pub dim_x: usize,
    pub index_upper: f64,
    pub index_exact: bool,
    pub lie_dim_primal: usize,
    pub lie_dim_dual_model: usize,
    pub bump_coverage_fraction: f64,
    /// Isometry drift of the rotation generator on the dual model; `None`
    /// when `E` has no rotations.
    pub dual_rotation_drift: Option<f64>,
    pub dual_model_dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub kind: EKind,
    pub level: u32,
    pub records: Vec<ExperimentRecord>,
}

/// The dual model `E* ⊕₁ ℓ₁^gaps` for the experiment.
pub fn dual_model(kind: EKind, gaps: usize) -> Result<NormedSpace> {
    let e_star = match kind {
        EKind::L2Plane => NormedSpace::lp(Field::Real, 2.0, 2)?,
        EKind::Constants => NormedSpace::lp(Field::Real, 1.0, 1)?,
    };
    if gaps == 0 {
        return Ok(e_star);
    }
    l1_sum(vec![e_star, NormedSpace::lp(Field::Real, 1.0, gaps)?])
}

/// Index and Lie-algebra trends of the discrete `X(E)` across `m_list`,
/// next to the exact `ℓ₁`-sum model of its dual.
pub fn main_example_experiment(
    kind: EKind,
    k: u32,
    m_list: &[u64],
    budget: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let mut records = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let grid = cantor_grid(k, m)?;
        let (basis, _) = e_basis_for(kind, &grid)?;
        let xe = build_XE(&grid, &basis)?;
        let index = numerical_index_estimate::<f64>(&xe.space, budget, seed)?;
        let lie_primal = lie_algebra_basis::<f64>(&xe.space, DEFAULT_LIE_TOL)?;
        let gaps = grid.gap_nodes.len();
        let model = dual_model(kind, gaps)?;
        let lie_dual = lie_algebra_basis::<f64>(&model, DEFAULT_LIE_TOL)?;
        let drift = match kind {
            EKind::L2Plane => {
                let plane = NormedSpace::lp(Field::Real, 2.0, 2)?;
                let j = Operator::on(&plane, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]))?;
                let gen = if gaps == 0 {
                    j
                } else {
                    extend_by_zero(&j, &NormedSpace::lp(Field::Real, 1.0, gaps)?)?.operator
                };
                Some(semigroup_verify(&model, &gen, &default_rho_grid(), f64::INFINITY)?.max_drift)
            }
            EKind::Constants => None,
        };
        records.push(ExperimentRecord {
            m,
            dim_x: xe.dim(),
            index_upper: index.upper,
            index_exact: index.exact,
            lie_dim_primal: lie_primal.dimension,
            lie_dim_dual_model: lie_dual.dimension,
            bump_coverage_fraction: bump_coverage(&xe),
            dual_rotation_drift: drift,
            dual_model_dim: model.dim(),
        });
    }
    Ok(ExperimentReport {
        kind,
        level: k,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        let g = cantor_grid(1, 27).unwrap();
        assert_eq!(g.cantor_nodes.len(), 20);
        assert_eq!(g.gap_nodes, (10..=17).collect::<Vec<_>>());
        let g = cantor_grid(0, 3).unwrap();
        assert_eq!(g.cantor_nodes.len(), 4);
        let g = cantor_grid(2, 9).unwrap();
        assert_eq!(g.gap_nodes, vec![4, 5]);
        let g = cantor_grid(2, 27).unwrap();
        assert_eq!(g.gap_nodes, vec![4, 5, 10, 11, 12, 13, 14, 15, 16, 17, 22, 23]);
        assert!(cantor_grid(1, 10).is_err());
    }

    #[test]
    fn dimensions_of_xe() {
        let g = cantor_grid(1, 27).unwrap();
        let n = g.cantor_nodes.len();
        let c = build_XE(&g, &vec![vec![1.0]; n]).unwrap();
        assert_eq!(c.dim(), 9);
        let y = build_XE(&g, &vec![vec![]; n]).unwrap();
        assert_eq!(y.dim(), 8);
        let full: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        assert_eq!(build_XE(&g, &full).unwrap().dim(), 28);
        assert!(build_XE(&g, &vec![vec![1.0, 1.0]; n]).is_err());
    }

    #[test]
    fn bump_examples() {
        let g = cantor_grid(1, 27).unwrap();
        let xe = build_XE(&g, &vec![vec![1.0]; g.cantor_nodes.len()]).unwrap();
        let b = urysohn_bump(&xe, (1.0 / 3.0, 2.0 / 3.0)).unwrap();
        assert_eq!(b.node, 13);
        assert_eq!(norm(&xe.space, &b.coords).unwrap(), 1.0);
        assert!(urysohn_bump(&xe, (0.30, 0.34)).is_err());
        assert!(urysohn_bump(&xe, (0.0, 1.0)).is_ok());
    }

    #[test]
    fn embedding_examples() {
        let e = embed_l2_in_sup(true, 4).unwrap();
        let s = e.basis.iter().fold(0.0f64, |m, r| m.max((r[0] + r[1]).abs()));
        let closed = (0..4)
            .map(|i| core::f64::consts::SQRT_2 * libm::cos(PI * i as f64 / 4.0 - PI / 4.0).abs())
            .fold(0.0f64, f64::max);
        assert!((s - closed).abs() < 1e-15);
        let e8 = embed_l2_in_sup(true, 8).unwrap();
        assert!((e.error_bound / e8.error_bound - 4.0).abs() < 1e-12);
        assert!(embed_l2_in_sup(true, 2).is_err());
    }

    #[test]
    fn quotient_examples() {
        let g = cantor_grid(1, 27).unwrap();
        let xe = build_XE(&g, &vec![vec![1.0]; g.cantor_nodes.len()]).unwrap();
        let f = affine_extension(&xe, &[0.9]);
        assert!(xe.values(&f).iter().all(|v| *v == 0.9));
        let r = quotient_isometry_check(&xe, &[vec![0.9], vec![0.0]], 1e-10).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn gap_functionals_have_norm_one() {
        let g = cantor_grid(1, 27).unwrap();
        let xe = build_XE(&g, &vec![vec![1.0]; g.cantor_nodes.len()]).unwrap();
        let r = gap_functional_norms(&xe, 1e-9).unwrap();
        assert!(r.all_unit && r.unit_count == 8);
        let y = build_XE(&g, &vec![vec![]; g.cantor_nodes.len()]).unwrap();
        let rows = y.basis_rows();
        assert_eq!(dual_norm(&y.space, &rows[0]).unwrap(), 0.0);
    }
}
