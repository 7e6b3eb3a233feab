//! Numerical ranges, numerical radii, numerical indices and isometry Lie
//! algebras of finite-dimensional real and complex normed spaces.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod cantor;
pub mod error;
pub mod expm;
pub mod index;
pub mod lie;
pub mod linalg;
mod lp;
pub mod numrange;
pub mod operators;
pub mod polytope;
pub mod scalar;
pub mod spaces;
pub mod structure;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scalar::{Field, Scalar};
pub use spaces::{
    dual_norm, dual_space, duality_pairs, duality_pairs_with, extreme_points, make_space, norm,
    Descriptor, DualityPair, Exponent, NormedSpace, PairSet, SumKind,
};
pub use operators::{adjoint, expm, op_norm, op_norm_with, Operator};
pub use spaces::Estimate;
