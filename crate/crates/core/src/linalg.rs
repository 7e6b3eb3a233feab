//! Small dense linear-algebra helpers on top of nalgebra.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

/// Relative singular-value threshold used for rank decisions on
/// geometric input (vertex lists, bases).
pub const RANK_TOL: f64 = 1e-10;

fn padded_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    let nrows = rows.len().max(ncols).max(1);
    let mut m = DMatrix::zeros(nrows, ncols);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    m
}

pub(crate) fn rank_of_rows(rows: &[Vec<f64>], ncols: usize) -> usize {
    if rows.is_empty() || ncols == 0 {
        return 0;
    }
    let m = padded_rows(rows, ncols);
    let sv = m.singular_values();
    let smax = sv.iter().fold(0.0f64, |a, v| a.max(*v));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|v| **v > RANK_TOL * smax).count()
}

/// Orthonormal basis of `{x : r·x = 0 for every row r}`; singular values at
/// or below `rel_tol·σ_max` count as zero.
pub fn null_space(rows: &[Vec<f64>], ncols: usize, rel_tol: f64) -> Vec<Vec<f64>> {
    if ncols == 0 {
        return Vec::new();
    }
    let m = padded_rows(rows, ncols);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(0.0f64, |a, v| a.max(*v));
    let mut out = Vec::new();
    for (i, s) in sv.iter().enumerate() {
        if smax == 0.0 || *s <= rel_tol * smax {
            out.push(vt.row(i).iter().copied().collect());
        }
    }
    out
}

/// A unit vector (approximately) annihilated by every row.
pub(crate) fn null_vector_of_rows(rows: &[Vec<f64>], ncols: usize) -> Vec<f64> {
    let m = padded_rows(rows, ncols);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if *v < bv { (i, *v) } else { (bi, bv) });
    vt.row(imin).iter().copied().collect()
}

/// `(A + A^H)/2`.
pub fn hermitian_part<S: Scalar>(a: &DMatrix<S>) -> DMatrix<S> {
    let half = S::from_real(0.5);
    (a + a.adjoint()) * half
}

/// Eigenvalues (ascending) and matching unit eigenvectors of a hermitian matrix.
pub fn hermitian_eigen<S: Scalar>(h: &DMatrix<S>) -> (Vec<f64>, Vec<DVector<S>>) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let eig = h.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = idx
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (vals, vecs)
}

/// Largest singular value.
pub fn spectral_norm<S: Scalar>(a: &DMatrix<S>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(*v))
}

/// Largest singular value with a maximizing right singular vector.
pub(crate) fn spectral_norm_with_vector<S: Scalar>(a: &DMatrix<S>) -> (f64, DVector<S>) {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let (imax, smax) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, v)| if *v > bv { (i, *v) } else { (bi, bv) });
    let v: DVector<S> = vt.row(imax).adjoint().into_owned();
    (smax.max(0.0), v)
}

pub(crate) fn is_zero<S: Scalar>(a: &DMatrix<S>) -> bool {
    a.iter().all(|v| v.modulus() == 0.0)
}

pub(crate) fn mat_vec<S: Scalar>(a: &DMatrix<S>, x: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == S::zero() {
            continue;
        }
        for i in 0..a.nrows() {
            out[i] += a[(i, j)] * xj;
        }
    }
    out
}

/// `A^H φ`.
pub(crate) fn adjoint_vec<S: Scalar>(a: &DMatrix<S>, phi: &[S]) -> Vec<S> {
    (0..a.ncols())
        .map(|j| {
            (0..a.nrows()).fold(S::zero(), |acc, i| acc + a[(i, j)].conjugate() * phi[i])
        })
        .collect()
}
