//! Finite-dimensional normed spaces: construction, norms, duals and
//! duality pairs.

pub mod covering;
pub(crate) mod geometry;

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{capability, check_dim, construction, Result};
use crate::lp::gauge;
use crate::scalar::{pairing, Field, Scalar};

pub use geometry::{Disc, Estimate, ENUMERATION_CAP};
pub(crate) use geometry::Geometry;


/// Exponent of an `ℓ_p` norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinite => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinite,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    fn as_option(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinite => None,
        }
    }
}

/// `ℓ₁`-sum or `ℓ∞`-sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SumKind {
    L1,
    Linf,
}

impl SumKind {
    pub fn dual(self) -> SumKind {
        match self {
            SumKind::L1 => SumKind::Linf,
            SumKind::Linf => SumKind::L1,
        }
    }
}

/// How the norm of a space is given.
#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor {
    /// `ℓ_p^dim`.
    Lp { p: Exponent, dim: usize },
    /// Unit ball `conv(±vertices)`; real only.
    Polyhedral { vertices: Vec<Vec<f64>> },
    /// Direct sum of the parts.
    Sum { kind: SumKind, parts: Vec<NormedSpace> },
    /// Column span of `basis` inside the sup-normed space on `nodes`; one
    /// basis row per node. Real only.
    SupSubspace {
        nodes: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
}

/// A finite-dimensional normed space. Immutable once built.
#[derive(Clone, Debug)]
pub struct NormedSpace {
    field: Field,
    dim: usize,
    descriptor: Descriptor,
    geometry: Arc<Geometry>,
}

impl PartialEq for NormedSpace {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.dim == other.dim && self.descriptor == other.descriptor
    }
}

/// A state `(x, x*)` with `‖x‖ = ‖x*‖ = x*(x) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityPair<S: Scalar> {
    pub x: Vec<S>,
    pub xstar: Vec<S>,
}

/// Pairs returned by [`duality_pairs`].
#[derive(Clone, Debug, PartialEq)]
pub struct PairSet<S: Scalar> {
    pub pairs: Vec<DualityPair<S>>,
    /// `true` when the list is the complete set of extreme pairs.
    pub exact: bool,
}

/// Validates and canonicalizes a descriptor.
pub fn make_space(field: Field, descriptor: Descriptor) -> Result<NormedSpace> {
    let complex = field == Field::Complex;
    match descriptor {
        Descriptor::Lp { p, dim } => {
            if dim == 0 {
                return Err(construction("dimension must be positive"));
            }
            if let Exponent::Finite(v) = p {
                if !(v >= 1.0) || !v.is_finite() {
                    return Err(construction("exponent p must lie in [1, ∞]"));
                }
            }
            let geometry = geometry::lp_geometry(p.as_option(), dim, complex);
            Ok(NormedSpace {
                field,
                dim,
                descriptor: Descriptor::Lp { p, dim },
                geometry: Arc::new(geometry),
            })
        }
        Descriptor::Polyhedral { vertices } => {
            if complex {
                return Err(construction("polyhedral norms are real only"));
            }
            let dim = vertices.first().map(Vec::len).unwrap_or(0);
            if vertices.is_empty() || dim == 0 {
                return Err(construction("polyhedral vertex list is empty"));
            }
            if vertices.iter().flatten().any(|v| !v.is_finite()) {
                return Err(construction("polyhedral vertices must be finite"));
            }
            let (geometry, canonical) = geometry::polyhedral_geometry(&vertices, dim)?;
            Ok(NormedSpace {
                field,
                dim,
                descriptor: Descriptor::Polyhedral {
                    vertices: canonical,
                },
                geometry: Arc::new(geometry),
            })
        }
        Descriptor::Sum { kind, parts } => {
            if parts.is_empty() {
                return Err(construction("a direct sum needs at least one part"));
            }
            if parts.iter().any(|p| p.field != field) {
                return Err(construction("all summands must share the scalar field"));
            }
            if parts.len() == 1 {
                return Ok(parts.into_iter().next().expect("one part"));
            }
            let geometry = geometry::SumGeometry::new(
                kind,
                parts.iter().map(|p| (*p.geometry).clone()).collect(),
            );
            let dim = parts.iter().map(|p| p.dim).sum();
            Ok(NormedSpace {
                field,
                dim,
                descriptor: Descriptor::Sum { kind, parts },
                geometry: Arc::new(Geometry::Sum(geometry)),
            })
        }
        Descriptor::SupSubspace { nodes, basis } => {
            if complex {
                return Err(construction("sup-subspaces are real only"));
            }
            if nodes.len() != basis.len() {
                return Err(construction("sup-subspace basis needs one row per node"));
            }
            let dim = basis.first().map(Vec::len).unwrap_or(0);
            if dim == 0 || basis.iter().any(|r| r.len() != dim) {
                return Err(construction("sup-subspace basis is empty or ragged"));
            }
            let geometry = geometry::sup_subspace_geometry(&basis, dim)?;
            Ok(NormedSpace {
                field,
                dim,
                descriptor: Descriptor::SupSubspace { nodes, basis },
                geometry: Arc::new(geometry),
            })
        }
    }
}

impl NormedSpace {
    /// `ℓ_p^dim` over `field`; `p = f64::INFINITY` gives `ℓ∞`.
    pub fn lp(field: Field, p: f64, dim: usize) -> Result<Self> {
        let p = if p == f64::INFINITY {
            Exponent::Infinite
        } else {
            Exponent::Finite(p)
        };
        make_space(field, Descriptor::Lp { p, dim })
    }

    pub fn polyhedral(vertices: Vec<Vec<f64>>) -> Result<Self> {
        make_space(Field::Real, Descriptor::Polyhedral { vertices })
    }

    pub fn sup_subspace(nodes: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self> {
        make_space(Field::Real, Descriptor::SupSubspace { nodes, basis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_complex(&self) -> bool {
        self.field == Field::Complex
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub(crate) fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Euclidean spaces (`ℓ₂` of any dimension, or any one-dimensional space).
    pub fn is_hilbert(&self) -> bool {
        match self.descriptor {
            Descriptor::Lp { p, dim } => p == Exponent::Finite(2.0) || dim == 1,
            _ => self.dim == 1 && !self.is_complex(),
        }
    }

    /// Whether duality pairs, extreme points and operator norms are all
    /// available exactly.
    pub fn is_exact(&self) -> bool {
        self.geometry.is_polyhedral()
    }

    /// Whether some computations on this space fall back to sampling
    /// (smooth `ℓ_p` parts with `p ∉ {1, 2, ∞}`).
    pub fn is_sampled(&self) -> bool {
        self.geometry.has_smooth_leaf()
    }

    pub(crate) fn check_scalar<S: Scalar>(&self) -> Result<()> {
        if S::IS_COMPLEX == self.is_complex() {
            Ok(())
        } else {
            Err(construction("scalar type does not match the field of the space"))
        }
    }
}

/// The norm of `x`.
pub fn norm<S: Scalar>(space: &NormedSpace, x: &[S]) -> Result<f64> {
    space.check_scalar::<S>()?;
    check_dim(space.dim, x.len())?;
    match &space.descriptor {
        Descriptor::Polyhedral { vertices } => {
            let xr: Vec<f64> = x.iter().map(|v| v.real()).collect();
            gauge(vertices, &xr).ok_or_else(|| construction("polyhedral ball is not absorbing"))
        }
        Descriptor::SupSubspace { basis, .. } => Ok(basis.iter().fold(0.0f64, |m, row| {
            let v: f64 = row.iter().zip(x).map(|(b, c)| b * c.real()).sum();
            m.max(v.abs())
        })),
        _ => Ok(space.geometry.norm(x)),
    }
}

/// The dual norm `sup {|φ(x)| : ‖x‖ ≤ 1}` of the functional `phi`.
pub fn dual_norm<S: Scalar>(space: &NormedSpace, phi: &[S]) -> Result<f64> {
    space.check_scalar::<S>()?;
    check_dim(space.dim, phi.len())?;
    Ok(space.geometry.dual_norm(phi))
}

/// The dual space `X*`, with functionals represented as vectors acting by
/// `φ(x) = Σ conj(φ_i) x_i`.
pub fn dual_space(space: &NormedSpace) -> Result<NormedSpace> {
    let geometry = space.geometry.dual();
    let descriptor = match &space.descriptor {
        Descriptor::Lp { p, dim } => Descriptor::Lp {
            p: p.conjugate(),
            dim: *dim,
        },
        Descriptor::Sum { kind, parts } => Descriptor::Sum {
            kind: kind.dual(),
            parts: parts.iter().map(dual_space).collect::<Result<Vec<_>>>()?,
        },
        Descriptor::Polyhedral { .. } | Descriptor::SupSubspace { .. } => {
            match space.geometry.dual_ext_count() {
                Some(c) if c <= ENUMERATION_CAP => {}
                _ => return Err(capability("dual vertex set exceeds the enumeration cap")),
            }
            let mut vertices = space.geometry.dual_ext_points::<f64>(0).points;
            vertices.sort_by(|a, b| crate::polytope::lex_cmp(a, b));
            Descriptor::Polyhedral { vertices }
        }
    };
    Ok(NormedSpace {
        field: space.field,
        dim: space.dim,
        descriptor,
        geometry: Arc::new(geometry),
    })
}

/// Extreme points of the closed unit ball.
pub fn extreme_points(space: &NormedSpace) -> Result<Vec<Vec<f64>>> {
    if space.is_complex() || !space.geometry.is_polyhedral() {
        return Err(capability(
            "extreme points are only enumerated for polyhedral real spaces",
        ));
    }
    match space.geometry.ext_count() {
        Some(c) if c <= ENUMERATION_CAP => {}
        _ => return Err(capability("extreme point set exceeds the enumeration cap")),
    }
    let mut pts = space.geometry.ext_points::<f64>(0).points;
    if let Descriptor::Polyhedral { .. } = space.descriptor {
        pts.sort_by(|a, b| crate::polytope::lex_cmp(a, b));
    }
    Ok(pts)
}

/// Duality pairs: the exact extreme pairs on polyhedral spaces, otherwise a
/// deterministic sample of about `budget` pairs per smooth summand.
pub fn duality_pairs<S: Scalar>(space: &NormedSpace, budget: usize) -> Result<PairSet<S>> {
    duality_pairs_with(space, budget, &[])
}

/// As [`duality_pairs`], adding pairs built from caller-supplied vectors on
/// smooth summands.
pub fn duality_pairs_with<S: Scalar>(
    space: &NormedSpace,
    budget: usize,
    extra: &[Vec<S>],
) -> Result<PairSet<S>> {
    space.check_scalar::<S>()?;
    let (pairs, exact) = space.geometry.pairs(budget.max(1), extra)?;
    Ok(PairSet {
        pairs: pairs
            .into_iter()
            .map(|(x, xstar)| DualityPair { x, xstar })
            .collect(),
        exact,
    })
}

impl<S: Scalar> DualityPair<S> {
    /// `max(|‖x‖−1|, |‖x*‖−1|, |x*(x)−1|)`.
    pub fn defect(&self, space: &NormedSpace) -> Result<f64> {
        let nx = norm(space, &self.x)?;
        let nf = dual_norm(space, &self.xstar)?;
        let v = pairing(&self.xstar, &self.x) - S::one();
        Ok((nx - 1.0).abs().max((nf - 1.0).abs()).max(v.modulus()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn real(p: f64, n: usize) -> NormedSpace {
        NormedSpace::lp(Field::Real, p, n).unwrap()
    }

    #[test]
    fn linf_square_extremes() {
        let pts = extreme_points(&real(f64::INFINITY, 2)).unwrap();
        assert_eq!(pts.len(), 4);
        for p in pts {
            assert!(p.iter().all(|v| v.abs() == 1.0));
        }
    }

    #[test]
    fn sum_dimension_composes() {
        let s = make_space(
            Field::Real,
            Descriptor::Sum {
                kind: SumKind::L1,
                parts: vec![real(2.0, 2), real(1.0, 3)],
            },
        )
        .unwrap();
        assert_eq!(s.dim(), 5);
    }

    #[test]
    fn interior_vertex_dropped() {
        let s = NormedSpace::polyhedral(vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![0.5, 0.5],
        ])
        .unwrap();
        match s.descriptor() {
            Descriptor::Polyhedral { vertices } => {
                assert_eq!(vertices.len(), 6);
                assert!(!vertices.iter().any(|v| v == &vec![0.5, 0.5]));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn norms_of_examples() {
        assert_eq!(norm(&real(1.0, 2), &[1.0, -2.0]).unwrap(), 3.0);
        assert_eq!(norm(&real(f64::INFINITY, 2), &[1.0, -2.0]).unwrap(), 2.0);
        let s = make_space(
            Field::Real,
            Descriptor::Sum {
                kind: SumKind::L1,
                parts: vec![real(2.0, 2), real(1.0, 1)],
            },
        )
        .unwrap();
        assert!((norm(&s, &[3.0, 4.0, 1.0]).unwrap() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn bad_descriptors_rejected() {
        assert!(NormedSpace::lp(Field::Real, 0.5, 2).is_err());
        assert!(NormedSpace::polyhedral(vec![vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
        assert!(make_space(
            Field::Real,
            Descriptor::Sum {
                kind: SumKind::L1,
                parts: vec![]
            }
        )
        .is_err());
        assert!(NormedSpace::sup_subspace(vec![0.0, 1.0], vec![vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
    }

    #[test]
    fn pair_counts_of_square_and_cross() {
        let sq = duality_pairs::<f64>(&real(f64::INFINITY, 2), 8).unwrap();
        assert!(sq.exact);
        assert_eq!(sq.pairs.len(), 8);
        let cr = duality_pairs::<f64>(&real(1.0, 2), 8).unwrap();
        assert_eq!(cr.pairs.len(), 8);
        for p in sq.pairs.iter().chain(&cr.pairs) {
            assert!(p.defect(&real(1.0, 2)).is_ok());
        }
    }

    #[test]
    fn hilbert_pairs_are_diagonal() {
        let s = real(2.0, 2);
        let ps = duality_pairs::<f64>(&s, 16).unwrap();
        assert!(!ps.exact);
        assert!(ps.pairs.iter().all(|p| p.x == p.xstar));
    }

    #[test]
    fn lp_dual_swaps_exponents() {
        let d = dual_space(&real(1.0, 2)).unwrap();
        assert_eq!(
            d.descriptor(),
            &Descriptor::Lp {
                p: Exponent::Infinite,
                dim: 2
            }
        );
        assert!(extreme_points(&real(3.0, 2)).is_err());
    }
}
