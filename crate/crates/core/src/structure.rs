//! `ℓ₁`/`ℓ∞` direct sums and operators extended from one summand.

use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::DMatrix;

use crate::error::{check_dim, construction, Error, Result};
use crate::linalg::{mat_vec, null_vector_of_rows};
use crate::operators::{op_norm, Operator, DEFAULT_BUDGET};
use crate::scalar::Scalar;
use crate::spaces::covering::sphere_directions;
use crate::spaces::{make_space, norm, Descriptor, NormedSpace, SumKind};

/// Largest extreme-point set scanned by the isometry precondition check.
const ISOMETRY_SCAN_CAP: u128 = 1 << 14;

fn sum(kind: SumKind, parts: Vec<NormedSpace>) -> Result<NormedSpace> {
    let field = parts
        .first()
        .map(NormedSpace::field)
        .ok_or_else(|| construction("a direct sum needs at least one part"))?;
    make_space(field, Descriptor::Sum { kind, parts })
}

/// `X₁ ⊕₁ … ⊕₁ X_k`.
pub fn l1_sum(parts: Vec<NormedSpace>) -> Result<NormedSpace> {
    sum(SumKind::L1, parts)
}

/// `X₁ ⊕∞ … ⊕∞ X_k`.
pub fn linf_sum(parts: Vec<NormedSpace>) -> Result<NormedSpace> {
    sum(SumKind::Linf, parts)
}

/// Coordinate ranges of the top-level summands (the whole range for a
/// space that is not a sum).
pub fn block_ranges(space: &NormedSpace) -> Vec<Range<usize>> {
    match space.descriptor() {
        Descriptor::Sum { parts, .. } => {
            let mut out = Vec::with_capacity(parts.len());
            let mut at = 0;
            for p in parts {
                out.push(at..at + p.dim());
                at += p.dim();
            }
            out
        }
        _ => alloc::vec![0..space.dim()],
    }
}

/// Embeds `v` as summand `i` of `space`, zero elsewhere.
pub fn inject<S: Scalar>(space: &NormedSpace, i: usize, v: &[S]) -> Result<Vec<S>> {
    let ranges = block_ranges(space);
    let r = ranges
        .get(i)
        .cloned()
        .ok_or_else(|| construction("summand index out of range"))?;
    check_dim(r.len(), v.len())?;
    let mut out = alloc::vec![S::zero(); space.dim()];
    out[r].copy_from_slice(v);
    Ok(out)
}

/// Component of `x` in summand `i`.
pub fn project<S: Scalar>(space: &NormedSpace, i: usize, x: &[S]) -> Result<Vec<S>> {
    check_dim(space.dim(), x.len())?;
    let r = block_ranges(space)
        .get(i)
        .cloned()
        .ok_or_else(|| construction("summand index out of range"))?;
    Ok(x[r].to_vec())
}

/// How an extended operator was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// `T(y, z) = (Sy, 0)`.
    ExtendByZero,
    /// `T(y, z) = (Sy, z)`.
    ExtendIsometry,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::ExtendByZero => "extend_by_zero",
            Provenance::ExtendIsometry => "extend_isometry",
        }
    }
}

/// An operator on `Y ⊕₁ Z` built from an operator on `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Extension<S: Scalar> {
    pub operator: Operator<S>,
    pub provenance: Provenance,
    /// `dim Y`; the first block of the sum.
    pub summand_dim: usize,
}

fn block_diagonal<S: Scalar>(s: &DMatrix<S>, lower: DMatrix<S>) -> DMatrix<S> {
    let (n, m) = (s.nrows(), lower.nrows());
    let mut out = DMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(s);
    out.view_mut((n, n), (m, m)).copy_from(&lower);
    out
}

/// `T(y, z) = (Sy, 0)` on `Y ⊕₁ Z`.
pub fn extend_by_zero<S: Scalar>(s: &Operator<S>, z: &NormedSpace) -> Result<Extension<S>> {
    s.require_square()?;
    let space = l1_sum(alloc::vec![s.domain().clone(), z.clone()])?;
    let m = block_diagonal(s.matrix(), DMatrix::zeros(z.dim(), z.dim()));
    Ok(Extension {
        operator: Operator::on(&space, m)?,
        provenance: Provenance::ExtendByZero,
        summand_dim: s.domain().dim(),
    })
}

fn to_witness<S: Scalar>(x: &[S]) -> Vec<num_complex::Complex64> {
    x.iter().map(|v| v.to_complex()).collect()
}

/// Checks that `S` preserves norms, returning the worst vector otherwise.
pub fn check_isometry<S: Scalar>(s: &Operator<S>, tol: f64) -> Result<()> {
    s.require_square()?;
    let y = s.domain();
    let g = y.geometry();
    let points: Vec<Vec<S>> = match g.ext_count() {
        Some(c) if c <= ISOMETRY_SCAN_CAP => g.ext_points::<S>(0).points,
        _ => sphere_directions::<S>(y.dim(), DEFAULT_BUDGET)
            .into_iter()
            .chain(g.ext_points::<S>(DEFAULT_BUDGET).points)
            .collect(),
    };
    let mut worst = (0.0f64, None);
    for x in &points {
        let nx = norm(y, x)?;
        if nx == 0.0 {
            continue;
        }
        let dev = (norm(y, &mat_vec(s.matrix(), x))? - nx).abs() / nx;
        if dev > worst.0 {
            worst = (dev, Some(x.clone()));
        }
    }
    if worst.0 > tol {
        return Err(Error::NotIsometry {
            witness: to_witness(&worst.1.expect("worst point")),
            deviation: worst.0,
        });
    }
    let inverse = s.matrix().clone().try_inverse();
    let Some(inv) = inverse else {
        let rows: Vec<Vec<f64>> = (0..y.dim())
            .map(|r| (0..y.dim()).map(|c| s.matrix()[(r, c)].real()).collect())
            .collect();
        let v = null_vector_of_rows(&rows, y.dim());
        return Err(Error::NotIsometry {
            witness: v.iter().map(|x| num_complex::Complex64::new(*x, 0.0)).collect(),
            deviation: 1.0,
        });
    };
    for m in [s.matrix().clone(), inv] {
        let n = op_norm(&s.with_matrix(m.clone())?);
        if n.exact && n.value > 1.0 + tol {
            // locate a witness among the scanned points
            let w = points
                .iter()
                .max_by(|a, b| {
                    let fa = norm(y, &mat_vec(&m, a)).unwrap_or(0.0);
                    let fb = norm(y, &mat_vec(&m, b)).unwrap_or(0.0);
                    fa.partial_cmp(&fb).unwrap_or(core::cmp::Ordering::Equal)
                })
                .cloned()
                .unwrap_or_default();
            return Err(Error::NotIsometry {
                witness: to_witness(&w),
                deviation: n.value - 1.0,
            });
        }
    }
    Ok(())
}

/// `T(y, z) = (Sy, z)` on `Y ⊕₁ Z`; `S` must be an isometry of `Y`.
pub fn extend_isometry<S: Scalar>(s: &Operator<S>, z: &NormedSpace, tol: f64) -> Result<Extension<S>> {
    check_isometry(s, tol)?;
    let space = l1_sum(alloc::vec![s.domain().clone(), z.clone()])?;
    let m = block_diagonal(s.matrix(), DMatrix::identity(z.dim(), z.dim()));
    Ok(Extension {
        operator: Operator::on(&space, m)?,
        provenance: Provenance::ExtendIsometry,
        summand_dim: s.domain().dim(),
    })
}
