//! Scalar fields the toolkit works over.

use nalgebra::ComplexField;
use num_complex::Complex64;

/// Real or complex scalars with `f64` real parts.
pub trait Scalar: ComplexField<RealField = f64> + Copy + PartialEq + core::fmt::Debug {
    const IS_COMPLEX: bool;

    /// Builds a scalar from real and imaginary parts; the imaginary part is
    /// dropped for real scalars.
    fn from_parts(re: f64, im: f64) -> Self;

    fn to_complex(self) -> Complex64 {
        Complex64::new(self.real(), self.imaginary())
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
}

/// The scalar field of a space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

/// `φ^H x`, the action of the functional represented by `phi` on `x`.
#[inline]
pub(crate) fn pairing<S: Scalar>(phi: &[S], x: &[S]) -> S {
    phi.iter()
        .zip(x)
        .fold(S::zero(), |acc, (p, v)| acc + p.conjugate() * *v)
}

#[inline]
pub(crate) fn real_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
