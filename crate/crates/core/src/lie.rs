//! Skew-hermitian, hermitian and dissipative operators; the Lie algebra of
//! the isometry group and its one-parameter groups.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{capability, Result};
use crate::linalg::null_space;
use crate::numrange::range_summary;
use crate::operators::{expm, op_norm, Operator, DEFAULT_BUDGET};
use crate::scalar::Scalar;
use crate::spaces::NormedSpace;

/// Default relative singular-value threshold for the null space.
pub const DEFAULT_LIE_TOL: f64 = 1e-9;

/// A three-valued answer: sampled evidence can refute but not confirm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Yes => "true",
            Verdict::No => "false",
            Verdict::Unknown => "unknown",
        }
    }

    fn from_exact(holds: bool, exact: bool) -> Self {
        match (holds, exact) {
            (true, true) => Verdict::Yes,
            (false, _) => Verdict::No,
            (true, false) => Verdict::Unknown,
        }
    }
}

/// `Re V(T) = {0}`; in the real case equivalently `v(T) = 0`.
pub fn is_skew_hermitian<S: Scalar>(space: &NormedSpace, t: &Operator<S>, tol: f64) -> Result<Verdict> {
    let r = range_summary(space, t, DEFAULT_BUDGET)?;
    let holds = if S::IS_COMPLEX {
        r.sup_re <= tol && -r.inf_re <= tol && r.samples.iter().all(|z| z.re.abs() <= tol)
    } else {
        r.radius <= tol
    };
    Ok(Verdict::from_exact(holds, r.exact))
}

/// Result of [`semigroup_verify`].
#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupReport {
    /// `max_ρ |‖exp(ρT)‖ − 1|`.
    pub max_drift: f64,
    /// The `ρ` attaining `max_drift`.
    pub worst_rho: f64,
    pub isometric: bool,
    pub exact: bool,
    pub reduced_accuracy: bool,
}

/// 201 equally spaced points on `[-10, 10]`.
pub fn default_rho_grid() -> Vec<f64> {
    (0..=200).map(|k| -10.0 + 0.1 * k as f64).collect()
}

/// Measures how far `ρ ↦ exp(ρT)` is from a group of isometries.
pub fn semigroup_verify<S: Scalar>(
    space: &NormedSpace,
    t: &Operator<S>,
    rho_grid: &[f64],
    tol: f64,
) -> Result<SemigroupReport> {
    t.require_square()?;
    if t.domain() != space {
        return Err(crate::error::precondition("operator does not act on this space"));
    }
    let mut rep = SemigroupReport {
        max_drift: 0.0,
        worst_rho: 0.0,
        isometric: true,
        exact: true,
        reduced_accuracy: false,
    };
    for &rho in rho_grid {
        let e = expm(t, rho)?;
        rep.reduced_accuracy |= e.reduced_accuracy;
        let n = op_norm(&t.with_matrix(e.matrix)?);
        rep.exact &= n.exact;
        let drift = (n.value - 1.0).abs();
        if drift > rep.max_drift {
            rep.max_drift = drift;
            rep.worst_rho = rho;
        }
    }
    rep.isometric = rep.max_drift <= tol;
    Ok(rep)
}

/// A basis of the Lie algebra `{T : Re V(T) = 0}` with isometry drifts.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraReport<S: Scalar> {
    pub basis: Vec<Operator<S>>,
    pub dimension: usize,
    /// `max_drift` of each basis element over [`default_rho_grid`].
    pub residuals: Vec<f64>,
    pub exact: bool,
}

fn normalize_sign<S: Scalar>(m: &mut DMatrix<S>) {
    // first entry of largest modulus in row-major order
    let mut best = ((0usize, 0usize), 0.0f64);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if m[(r, c)].modulus() > best.1 + 1e-12 {
                best = ((r, c), m[(r, c)].modulus());
            }
        }
    }
    if best.1 == 0.0 {
        return;
    }
    let pivot = m[best.0];
    // rotate (or flip) so the pivot entry is positive real
    let phase = pivot.unscale(best.1).conjugate();
    *m *= phase;
}

/// Real skew-hermitian basis from the sparse pair constraints.
fn real_basis(space: &NormedSpace, tol: f64) -> Result<Vec<DMatrix<f64>>> {
    let d = space.dim();
    let mut rows = Vec::new();
    let mut zero = vec![false; d * d];
    space.geometry().lie_constraints(0, d, &mut rows, &mut zero)?;
    let rows: Vec<Vec<(usize, f64)>> = rows
        .into_iter()
        .map(|r| r.into_iter().filter(|(i, _)| !zero[*i]).collect::<Vec<_>>())
        .filter(|r: &Vec<(usize, f64)>| !r.is_empty())
        .collect();
    let mut parent: Vec<usize> = (0..d * d).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for r in &rows {
        for w in r.windows(2) {
            let a = find(&mut parent, w[0].0);
            let b = find(&mut parent, w[1].0);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    // group unknowns and rows by component root
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); d * d];
    for i in 0..d * d {
        if !zero[i] {
            let root = find(&mut parent, i);
            members[root].push(i);
        }
    }
    let mut comp_rows: Vec<Vec<usize>> = vec![Vec::new(); d * d];
    for (k, r) in rows.iter().enumerate() {
        let root = find(&mut parent, r[0].0);
        comp_rows[root].push(k);
    }
    let mut basis = Vec::new();
    for root in 0..d * d {
        let vars = &members[root];
        if vars.is_empty() {
            continue;
        }
        let local = |g: usize| vars.binary_search(&g).expect("variable in component");
        let dense: Vec<Vec<f64>> = comp_rows[root]
            .iter()
            .map(|&k| {
                let mut row = vec![0.0; vars.len()];
                for &(g, c) in &rows[k] {
                    row[local(g)] += c;
                }
                row
            })
            .collect();
        for v in null_space(&dense, vars.len(), tol) {
            let mut m = DMatrix::zeros(d, d);
            for (j, &g) in vars.iter().enumerate() {
                m[(g / d, g % d)] = v[j];
            }
            normalize_sign(&mut m);
            basis.push(m);
        }
    }
    Ok(basis)
}

/// Basis of `u(n)` in the Frobenius inner product.
fn unitary_algebra_basis(n: usize) -> Vec<DMatrix<Complex64>> {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i + 1..n {
            let mut a = DMatrix::zeros(n, n);
            a[(i, j)] = Complex64::new(h, 0.0);
            a[(j, i)] = Complex64::new(-h, 0.0);
            out.push(a);
            let mut b = DMatrix::zeros(n, n);
            b[(i, j)] = Complex64::new(0.0, h);
            b[(j, i)] = Complex64::new(0.0, h);
            out.push(b);
        }
    }
    for k in 0..n {
        let mut c = DMatrix::zeros(n, n);
        c[(k, k)] = Complex64::new(0.0, 1.0);
        out.push(c);
    }
    out
}

/// The Lie algebra of the isometry group as a real vector space, each basis
/// element checked through [`semigroup_verify`].
pub fn lie_algebra_basis<S: Scalar>(space: &NormedSpace, tol: f64) -> Result<LieAlgebraReport<S>> {
    space.check_scalar::<S>()?;
    let mats: Vec<DMatrix<S>> = if S::IS_COMPLEX {
        if !space.geometry().is_hilbert() {
            return Err(capability(
                "complex Lie algebras are only computed for Euclidean spaces",
            ));
        }
        unitary_algebra_basis(space.dim())
            .into_iter()
            .map(|m| m.map(|z| S::from_parts(z.re, z.im)))
            .collect()
    } else {
        real_basis(space, tol)?
            .into_iter()
            .map(|m| m.map(S::from_real))
            .collect()
    };
    let grid = default_rho_grid();
    let mut basis = Vec::with_capacity(mats.len());
    let mut residuals = Vec::with_capacity(mats.len());
    let mut exact = true;
    for m in mats {
        let op = Operator::on(space, m)?;
        let rep = semigroup_verify(space, &op, &grid, f64::INFINITY)?;
        exact &= rep.exact;
        residuals.push(rep.max_drift);
        basis.push(op);
    }
    Ok(LieAlgebraReport {
        dimension: basis.len(),
        basis,
        residuals,
        exact,
    })
}

/// Result of [`dissipativity`].
#[derive(Clone, Debug, PartialEq)]
pub struct DissipativityReport {
    pub dissipative: bool,
    pub sup_re: f64,
    /// `max ‖exp(ρT)‖` over `ρ ∈ (0, 10]`.
    pub max_semigroup_norm: f64,
    /// Whether the semigroup bound agrees with the range answer.
    pub consistent: bool,
}

/// `sup Re V(T) ≤ tol`, cross-checked against `‖exp(ρT)‖ ≤ 1` for `ρ > 0`.
pub fn dissipativity<S: Scalar>(space: &NormedSpace, t: &Operator<S>, tol: f64) -> Result<DissipativityReport> {
    let r = range_summary(space, t, DEFAULT_BUDGET)?;
    if !r.exact {
        return Err(capability("dissipativity needs an exact numerical range"));
    }
    let mut max_norm: f64 = 0.0;
    for k in 1..=100 {
        let rho = 0.1 * k as f64;
        let e = expm(t, rho)?;
        max_norm = max_norm.max(op_norm(&t.with_matrix(e.matrix)?).value);
    }
    let dissipative = r.sup_re <= tol;
    let bounded = max_norm <= 1.0 + 10.0 * tol.max(1e-12) + 1e-12;
    Ok(DissipativityReport {
        dissipative,
        sup_re: r.sup_re,
        max_semigroup_norm: max_norm,
        consistent: dissipative == bounded || (!dissipative && r.sup_re <= 10.0 * tol),
    })
}

/// `Re V(T) ⊂ (−∞, 0]`.
pub fn is_dissipative<S: Scalar>(space: &NormedSpace, t: &Operator<S>, tol: f64) -> Result<bool> {
    let r = range_summary(space, t, DEFAULT_BUDGET)?;
    if !r.exact {
        return Err(capability("dissipativity needs an exact numerical range"));
    }
    Ok(r.sup_re <= tol)
}

/// `V(T) ⊂ ℝ` on a complex Euclidean space.
pub fn is_hermitian<S: Scalar>(space: &NormedSpace, t: &Operator<S>, tol: f64) -> Result<bool> {
    if !S::IS_COMPLEX || !space.is_complex() {
        return Err(capability("hermitian operators are defined on complex spaces"));
    }
    if !space.geometry().is_hilbert() {
        return Err(capability("hermitian classification needs a complex Euclidean space"));
    }
    let r = range_summary(space, t, DEFAULT_BUDGET)?;
    let real_samples = r.samples.iter().all(|z| z.im.abs() <= tol);
    let it = t.scaled(S::from_parts(0.0, 1.0));
    Ok(real_samples && is_skew_hermitian(space, &it, tol)? == Verdict::Yes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Field;
    use crate::spaces::{make_space, Descriptor, SumKind};

    fn sp(p: f64, n: usize) -> NormedSpace {
        NormedSpace::lp(Field::Real, p, n).unwrap()
    }

    fn j() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
    }

    #[test]
    fn skew_examples() {
        let l2 = sp(2.0, 2);
        assert_eq!(is_skew_hermitian(&l2, &Operator::on(&l2, j()).unwrap(), 1e-9).unwrap(), Verdict::Yes);
        let l1 = sp(1.0, 2);
        assert_eq!(is_skew_hermitian(&l1, &Operator::on(&l1, j()).unwrap(), 1e-9).unwrap(), Verdict::No);
        assert_eq!(
            is_skew_hermitian(&l1, &Operator::<f64>::zero(&l1).unwrap(), 1e-9).unwrap(),
            Verdict::Yes
        );
    }

    #[test]
    fn lie_dimensions() {
        assert_eq!(lie_algebra_basis::<f64>(&sp(2.0, 3), 1e-9).unwrap().dimension, 3);
        assert_eq!(lie_algebra_basis::<f64>(&sp(1.0, 3), 1e-9).unwrap().dimension, 0);
        let s = make_space(
            Field::Real,
            Descriptor::Sum {
                kind: SumKind::L1,
                parts: vec![sp(2.0, 2), sp(1.0, 2)],
            },
        )
        .unwrap();
        let rep = lie_algebra_basis::<f64>(&s, 1e-9).unwrap();
        assert_eq!(rep.dimension, 1);
        let b = rep.basis[0].matrix();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((b[(0, 1)] - h).abs() < 1e-12 && (b[(1, 0)] + h).abs() < 1e-12);
        assert!(rep.residuals[0] < 1e-9);
    }

    #[test]
    fn semigroup_examples() {
        let linf = sp(f64::INFINITY, 2);
        let t = Operator::on(&linf, j()).unwrap();
        let rho = core::f64::consts::FRAC_PI_4;
        let rep = semigroup_verify(&linf, &t, &[rho], 1e-9).unwrap();
        assert!((rep.max_drift - (core::f64::consts::SQRT_2 - 1.0)).abs() < 1e-12);
        let l2 = sp(2.0, 2);
        let rep = semigroup_verify(&l2, &Operator::on(&l2, j()).unwrap(), &default_rho_grid(), 1e-9).unwrap();
        assert!(rep.isometric);
    }

    #[test]
    fn dissipative_examples() {
        let l2 = sp(2.0, 2);
        let id = Operator::<f64>::identity(&l2).unwrap();
        assert!(is_dissipative(&l2, &id.scaled(-1.0), 1e-9).unwrap());
        assert!(!is_dissipative(&l2, &id, 1e-9).unwrap());
        let n = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let n = Operator::on(&l2, n).unwrap();
        assert!(!is_dissipative(&l2, &n, 1e-9).unwrap());
        let r = dissipativity(&l2, &id.scaled(-1.0), 1e-9).unwrap();
        assert!(r.dissipative && r.consistent);
    }

    #[test]
    fn hermitian_examples() {
        let c = NormedSpace::lp(Field::Complex, 2.0, 2).unwrap();
        let re = |v: f64| Complex64::new(v, 0.0);
        let d = DMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(2.0)]);
        assert!(is_hermitian(&c, &Operator::on(&c, d).unwrap(), 1e-9).unwrap());
        let ii = Operator::<Complex64>::identity(&c).unwrap().scaled(Complex64::new(0.0, 1.0));
        assert!(!is_hermitian(&c, &ii, 1e-9).unwrap());
        let x = DMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        assert!(is_hermitian(&c, &Operator::on(&c, x).unwrap(), 1e-9).unwrap());
        let l2 = sp(2.0, 2);
        assert!(is_hermitian(&l2, &Operator::on(&l2, j()).unwrap(), 1e-9).is_err());
    }

    #[test]
    fn complex_lie_algebra_is_unitary() {
        let c = NormedSpace::lp(Field::Complex, 2.0, 3).unwrap();
        let rep = lie_algebra_basis::<Complex64>(&c, 1e-9).unwrap();
        assert_eq!(rep.dimension, 9);
        assert!(rep.residuals.iter().all(|r| *r < 1e-9));
    }
}
