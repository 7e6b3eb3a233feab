//! Linear operators between normed spaces.

use nalgebra::DMatrix;

use crate::error::{check_dim, construction, precondition, Result};
use crate::expm::{expm_scaled, Exponential};
use crate::spaces::geometry::op_norm as geometry_op_norm;
use crate::spaces::{dual_space, Estimate, NormedSpace};
use crate::scalar::Scalar;

/// Sample budget used for operator norms on spaces without a finite
/// extreme-point description.
pub const DEFAULT_BUDGET: usize = 64;

/// A matrix acting from `domain` to `codomain`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<S: Scalar> {
    matrix: DMatrix<S>,
    domain: NormedSpace,
    codomain: NormedSpace,
}

impl<S: Scalar> Operator<S> {
    pub fn new(matrix: DMatrix<S>, domain: NormedSpace, codomain: NormedSpace) -> Result<Self> {
        domain.check_scalar::<S>()?;
        codomain.check_scalar::<S>()?;
        check_dim(domain.dim(), matrix.ncols())?;
        check_dim(codomain.dim(), matrix.nrows())?;
        Ok(Operator {
            matrix,
            domain,
            codomain,
        })
    }

    /// An operator from `space` to itself.
    pub fn on(space: &NormedSpace, matrix: DMatrix<S>) -> Result<Self> {
        Self::new(matrix, space.clone(), space.clone())
    }

    pub fn identity(space: &NormedSpace) -> Result<Self> {
        Self::on(space, DMatrix::identity(space.dim(), space.dim()))
    }

    pub fn zero(space: &NormedSpace) -> Result<Self> {
        Self::on(space, DMatrix::zeros(space.dim(), space.dim()))
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.matrix
    }

    pub fn domain(&self) -> &NormedSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &NormedSpace {
        &self.codomain
    }

    pub fn is_square(&self) -> bool {
        self.domain == self.codomain
    }

    /// The same spaces with a different matrix of the same shape.
    pub fn with_matrix(&self, matrix: DMatrix<S>) -> Result<Self> {
        Self::new(matrix, self.domain.clone(), self.codomain.clone())
    }

    pub fn scaled(&self, lambda: S) -> Self {
        Operator {
            matrix: &self.matrix * lambda,
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Operator<S>) -> Result<Self> {
        if other.codomain != self.domain {
            return Err(construction("operators are not composable"));
        }
        Ok(Operator {
            matrix: &self.matrix * &other.matrix,
            domain: other.domain.clone(),
            codomain: self.codomain.clone(),
        })
    }

    pub(crate) fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(precondition("the operator must map a space to itself"))
        }
    }
}

/// `‖T‖` with the default sample budget.
pub fn op_norm<S: Scalar>(t: &Operator<S>) -> Estimate {
    op_norm_with(t, DEFAULT_BUDGET)
}

/// `‖T‖`: exact by enumeration on polyhedral spaces and by the SVD on
/// Euclidean ones; otherwise a sampled lower bound.
pub fn op_norm_with<S: Scalar>(t: &Operator<S>, budget: usize) -> Estimate {
    geometry_op_norm(t.domain.geometry(), t.codomain.geometry(), &t.matrix, budget)
}

/// The adjoint `T* : Y* → X*`, the conjugate transpose.
pub fn adjoint<S: Scalar>(t: &Operator<S>) -> Result<Operator<S>> {
    Ok(Operator {
        matrix: t.matrix.adjoint(),
        domain: dual_space(&t.codomain)?,
        codomain: dual_space(&t.domain)?,
    })
}

/// `exp(ρT)`.
pub fn expm<S: Scalar>(t: &Operator<S>, rho: f64) -> Result<Exponential<S>> {
    if t.matrix.nrows() != t.matrix.ncols() {
        return Err(precondition("the exponential needs a square matrix"));
    }
    Ok(expm_scaled(&t.matrix, rho))
}
