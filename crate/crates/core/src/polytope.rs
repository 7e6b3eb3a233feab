//! Centrally symmetric polytopes: V-representation canonicalization and
//! polar vertex enumeration by the double-description method.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{construction, Result};
use crate::linalg::rank_of_rows;
use crate::lp::gauge;

/// Tolerance for merging duplicate points.
pub const DEDUP_TOL: f64 = 1e-12;
/// Tolerance for merging vertices produced by the floating-point enumeration.
pub const MERGE_TOL: f64 = 1e-9;
/// Slack allowed in hull-membership tests.
pub const HULL_TOL: f64 = 1e-9;

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

fn negated(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

/// Removes near-duplicates (max-abs distance `tol`), keeping first occurrences.
pub(crate) fn dedup_points(points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| max_abs_diff(q, &p) <= tol) {
            out.push(p);
        }
    }
    out
}

/// Symmetrizes, deduplicates and hull-reduces a point set, returning the
/// vertex set of `conv(±points)` sorted lexicographically.
pub fn canonical_vertices(points: &[Vec<f64>], dim: usize) -> Result<Vec<Vec<f64>>> {
    if points.is_empty() {
        return Err(construction("polyhedral vertex list is empty"));
    }
    for p in points {
        if p.len() != dim {
            return Err(construction("polyhedral vertices have inconsistent lengths"));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(construction("polyhedral vertex has a non-finite coordinate"));
        }
    }
    // one representative per ± pair
    let mut reps: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if p.iter().all(|v| v.abs() <= DEDUP_TOL) {
            continue;
        }
        let neg = negated(p);
        if reps
            .iter()
            .any(|q| max_abs_diff(q, p) <= DEDUP_TOL || max_abs_diff(q, &neg) <= DEDUP_TOL)
        {
            continue;
        }
        reps.push(p.clone());
    }
    if rank_of_rows(&reps, dim) < dim {
        return Err(construction(
            "polyhedral vertices do not span the space (unit ball is not full-dimensional)",
        ));
    }
    let mut keep = vec![true; reps.len()];
    for i in 0..reps.len() {
        let others: Vec<Vec<f64>> = reps
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i && keep[*j])
            .flat_map(|(_, q)| [q.clone(), negated(q)])
            .collect();
        if let Some(g) = gauge(&others, &reps[i]) {
            if g <= 1.0 + HULL_TOL {
                keep[i] = false;
            }
        }
    }
    let mut out: Vec<Vec<f64>> = reps
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .flat_map(|(p, _)| {
            let n = negated(&p);
            [p, n]
        })
        .collect();
    out.sort_by(|a, b| lex_cmp(a, b));
    Ok(out)
}

/// Whether `p` lies in `conv(points)` (points assumed symmetric about 0).
pub fn in_symmetric_hull(points: &[Vec<f64>], p: &[f64], tol: f64) -> bool {
    match gauge(points, p) {
        Some(g) => g <= 1.0 + tol,
        None => false,
    }
}

#[derive(Clone)]
struct Ray {
    y: Vec<f64>,
    zero: Vec<u64>,
}

fn bit_set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1u64 << (i % 64);
}

fn bits_and(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn bits_count(a: &[u64]) -> usize {
    a.iter().map(|w| w.count_ones() as usize).sum()
}

fn bits_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn normalize_ray(y: &mut [f64]) {
    let m = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m > 0.0 {
        for v in y.iter_mut() {
            *v /= m;
        }
    }
}

/// Outcome of enumerating the vertices of `{w : a_i·w ≤ 1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Enumeration {
    Bounded(Vec<Vec<f64>>),
    /// The region contains a line or ray; the payload is a direction in it.
    Unbounded(Vec<f64>),
}

/// Vertices of `{w ∈ R^dim : a·w ≤ 1 for every a in rows}` (which contains
/// the origin in its interior) by double description on the homogenized
/// cone `{(w, s) : a·w ≤ s, s ≥ 0}`.
pub fn enumerate_vertices(rows: &[Vec<f64>], dim: usize) -> Enumeration {
    let n = dim + 1;
    // homogenized constraint rows h·y ≤ 0
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(rows.len() + 1);
    let mut pos = vec![0.0; n];
    pos[dim] = -1.0;
    h.push(pos);
    for a in rows {
        let mut r = a.clone();
        r.push(-1.0);
        h.push(r);
    }
    let words = h.len().div_ceil(64);

    // initial basis of n independent rows, greedily
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut span: Vec<Vec<f64>> = Vec::new();
    for (i, row) in h.iter().enumerate() {
        let mut cand = span.clone();
        cand.push(row.clone());
        if rank_of_rows(&cand, n) > span.len() {
            span = cand;
            chosen.push(i);
            if chosen.len() == n {
                break;
            }
        }
    }
    if chosen.len() < n {
        // a nonzero w with a·w = 0 for all rows
        let dir = crate::linalg::null_vector_of_rows(rows, dim);
        return Enumeration::Unbounded(dir);
    }
    let hk = nalgebra::DMatrix::from_fn(n, n, |r, c| h[chosen[r]][c]);
    let inv = match hk.try_inverse() {
        Some(m) => m,
        None => {
            let dir = crate::linalg::null_vector_of_rows(rows, dim);
            return Enumeration::Unbounded(dir);
        }
    };
    let mut rays: Vec<Ray> = Vec::with_capacity(n);
    for j in 0..n {
        let mut y: Vec<f64> = (0..n).map(|r| -inv[(r, j)]).collect();
        normalize_ray(&mut y);
        let mut zero = vec![0u64; words];
        for (k, &row) in chosen.iter().enumerate() {
            if k != j {
                bit_set(&mut zero, row);
            }
        }
        rays.push(Ray { y, zero });
    }
    let mut done = vec![false; h.len()];
    for &c in &chosen {
        done[c] = true;
    }
    for (idx, row) in h.iter().enumerate() {
        if done[idx] {
            continue;
        }
        let rnorm = libm::sqrt(row.iter().map(|v| v * v).sum::<f64>());
        let vals: Vec<f64> = rays.iter().map(|r| crate::scalar::real_dot(row, &r.y)).collect();
        let tol = 1e-10 * rnorm.max(1.0);
        let plus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > tol).collect();
        if plus.is_empty() {
            for (i, r) in rays.iter_mut().enumerate() {
                if vals[i].abs() <= tol {
                    bit_set(&mut r.zero, idx);
                }
            }
            continue;
        }
        let minus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -tol).collect();
        let mut next: Vec<Ray> = Vec::new();
        for &p in &plus {
            for &q in &minus {
                let common = bits_and(&rays[p].zero, &rays[q].zero);
                if bits_count(&common) + 2 < n {
                    continue;
                }
                let adjacent = rays.iter().enumerate().all(|(k, r)| {
                    k == p || k == q || !bits_subset(&common, &r.zero)
                });
                if !adjacent {
                    continue;
                }
                let (vp, vq) = (vals[p], vals[q]);
                let mut y: Vec<f64> = rays[q]
                    .y
                    .iter()
                    .zip(&rays[p].y)
                    .map(|(yq, yp)| vp * yq - vq * yp)
                    .collect();
                normalize_ray(&mut y);
                let mut zero = common;
                bit_set(&mut zero, idx);
                next.push(Ray { y, zero });
            }
        }
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + next.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i] > tol {
                continue;
            }
            if vals[i].abs() <= tol {
                bit_set(&mut r.zero, idx);
            }
            kept.push(r);
        }
        kept.extend(next);
        rays = kept;
    }
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for r in &rays {
        let s = r.y[dim];
        if s <= 1e-12 {
            let dir: Vec<f64> = r.y[..dim].to_vec();
            return Enumeration::Unbounded(dir);
        }
        verts.push(r.y[..dim].iter().map(|v| v / s).collect());
    }
    let mut verts = dedup_points(verts, MERGE_TOL);
    verts.sort_by(|a, b| lex_cmp(a, b));
    Enumeration::Bounded(verts)
}

/// Vertices of the polar `{w : |w·v| ≤ 1 for all v}` of `conv(±vertices)`.
pub fn polar_vertices(vertices: &[Vec<f64>], dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * vertices.len());
    for v in vertices {
        rows.push(v.clone());
        rows.push(negated(v));
    }
    let rows = dedup_points(rows, DEDUP_TOL);
    match enumerate_vertices(&rows, dim) {
        Enumeration::Bounded(v) => Ok(v),
        Enumeration::Unbounded(_) => Err(construction(
            "vertex set does not span the space; polar is unbounded",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contains(set: &[Vec<f64>], p: &[f64]) -> bool {
        set.iter().any(|q| max_abs_diff(q, p) < 1e-9)
    }

    #[test]
    fn interior_point_is_dropped() {
        let pts = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![0.5, 0.5],
        ];
        let v = canonical_vertices(&pts, 2).unwrap();
        assert_eq!(v.len(), 6);
        assert!(!contains(&v, &[0.5, 0.5]));
        assert!(contains(&v, &[-1.0, -1.0]));
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let pts = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(canonical_vertices(&pts, 2).is_err());
        assert!(canonical_vertices(&[], 2).is_err());
    }

    #[test]
    fn polar_of_square_is_cross_polytope() {
        let sq = vec![
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
        ];
        let p = polar_vertices(&sq, 2).unwrap();
        assert_eq!(p.len(), 4);
        for e in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            assert!(contains(&p, &e));
        }
    }

    #[test]
    fn polar_of_cube_corners_in_three_dims() {
        let mut cube = Vec::new();
        for s in 0..8 {
            cube.push(
                (0..3)
                    .map(|i| if s >> i & 1 == 1 { 1.0 } else { -1.0 })
                    .collect::<Vec<_>>(),
            );
        }
        let p = polar_vertices(&cube, 3).unwrap();
        assert_eq!(p.len(), 6);
        let back = polar_vertices(&p, 3).unwrap();
        assert_eq!(back.len(), 8);
        for c in &cube {
            assert!(contains(&back, c));
        }
    }

    #[test]
    fn unbounded_region_reports_direction() {
        let rows = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        match enumerate_vertices(&rows, 2) {
            Enumeration::Unbounded(d) => assert!(d[0].abs() < 1e-12 && d[1].abs() > 0.5),
            other => panic!("{other:?}"),
        }
    }
}
