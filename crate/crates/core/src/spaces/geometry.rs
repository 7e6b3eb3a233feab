//! Internal norm geometry: every space is lowered to a tree whose leaves are
//! polytopes, Euclidean balls or smooth `ℓ_p` balls, joined by `ℓ₁`/`ℓ∞`
//! sums. All numerical routines dispatch on this tree.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{capability, construction, Result};
use crate::linalg::{adjoint_vec, is_zero, mat_vec, rank_of_rows, spectral_norm_with_vector};
use crate::polytope::{canonical_vertices, polar_vertices};
use crate::scalar::{pairing, real_dot, Scalar};
use crate::spaces::covering::sphere_directions;
use crate::spaces::SumKind;

/// Largest point or pair set the enumerators will materialize.
pub const ENUMERATION_CAP: u128 = 1 << 20;
/// Tolerance deciding whether a vertex lies on a facet.
pub const FACE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct PolyLeaf {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<Vec<f64>>,
    /// For each vertex, the facets (dual vertices) taking value 1 on it.
    pub vertex_faces: Vec<Vec<usize>>,
}

impl PolyLeaf {
    fn assemble(dim: usize, vertices: Vec<Vec<f64>>, facets: Vec<Vec<f64>>) -> Self {
        let vertex_faces = vertices
            .iter()
            .map(|v| {
                facets
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| (real_dot(w, v) - 1.0).abs() <= FACE_TOL)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        PolyLeaf {
            dim,
            vertices,
            facets,
            vertex_faces,
        }
    }

    pub fn from_vertices(points: &[Vec<f64>], dim: usize) -> Result<Self> {
        let vertices = canonical_vertices(points, dim)?;
        let facets = polar_vertices(&vertices, dim)?;
        Ok(Self::assemble(dim, vertices, facets))
    }

    /// Builds the leaf whose dual ball is `conv(±normals)`.
    pub fn from_facets(normals: &[Vec<f64>], dim: usize) -> Result<Self> {
        let facets = canonical_vertices(normals, dim)?;
        let vertices = polar_vertices(&facets, dim)?;
        Ok(Self::assemble(dim, vertices, facets))
    }

    /// `[-1/scale, 1/scale]` on the line.
    pub fn segment(scale: f64) -> Self {
        Self::assemble(
            1,
            vec![vec![-1.0 / scale], vec![1.0 / scale]],
            vec![vec![-scale], vec![scale]],
        )
    }

    fn gauge<S: Scalar>(&self, x: &[S]) -> f64 {
        self.facets
            .iter()
            .fold(0.0f64, |m, w| m.max(real_dot_with(w, x).abs()))
    }

    fn dual_gauge<S: Scalar>(&self, phi: &[S]) -> f64 {
        self.vertices
            .iter()
            .fold(0.0f64, |m, v| m.max(real_dot_with(v, phi).abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SumGeometry {
    pub kind: SumKind,
    pub parts: Vec<Geometry>,
    pub offsets: Vec<usize>,
    pub dim: usize,
}

impl SumGeometry {
    pub fn new(kind: SumKind, parts: Vec<Geometry>) -> Self {
        // flatten nested sums of the same kind
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Geometry::Sum(s) if s.kind == kind => flat.extend(s.parts),
                other => flat.push(other),
            }
        }
        let mut offsets = Vec::with_capacity(flat.len());
        let mut dim = 0;
        for p in &flat {
            offsets.push(dim);
            dim += p.dim();
        }
        SumGeometry {
            kind,
            parts: flat,
            offsets,
            dim,
        }
    }

    fn range(&self, i: usize) -> core::ops::Range<usize> {
        self.offsets[i]..self.offsets[i] + self.parts[i].dim()
    }

    fn restrict(&self, keep: &[usize]) -> (Geometry, Vec<usize>) {
        let mut idx = Vec::new();
        for &i in keep {
            idx.extend(self.range(i));
        }
        let g = if keep.len() == 1 {
            self.parts[keep[0]].clone()
        } else {
            Geometry::Sum(SumGeometry::new(
                self.kind,
                keep.iter().map(|&i| self.parts[i].clone()).collect(),
            ))
        };
        (g, idx)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Geometry {
    Poly(PolyLeaf),
    Hilbert { dim: usize },
    Smooth { p: f64, dim: usize },
    Sum(SumGeometry),
}

/// A number together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// `true` for certified values from finite enumeration or closed forms,
    /// `false` for sampled lower bounds.
    pub exact: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, exact: true }
    }

    pub fn sampled(value: f64) -> Self {
        Estimate {
            value,
            exact: false,
        }
    }
}

pub(crate) type Pair<S> = (Vec<S>, Vec<S>);

/// Either a finite exact point set or a sample.
pub(crate) struct PointSet<S> {
    pub points: Vec<Vec<S>>,
    pub exact: bool,
}

fn to_scalars<S: Scalar>(v: &[f64]) -> Vec<S> {
    v.iter().map(|x| S::from_real(*x)).collect()
}

fn real_parts<S: Scalar>(v: &[S]) -> Vec<f64> {
    v.iter().map(|x| x.real()).collect()
}

fn real_dot_with<S: Scalar>(a: &[f64], x: &[S]) -> f64 {
    a.iter().zip(x).map(|(u, v)| u * v.real()).sum()
}

fn euclid<S: Scalar>(v: &[S]) -> f64 {
    libm::sqrt(v.iter().map(|x| x.modulus_squared()).sum())
}

fn p_norm<S: Scalar>(v: &[S], p: f64) -> f64 {
    libm::pow(v.iter().map(|x| libm::pow(x.modulus(), p)).sum::<f64>(), 1.0 / p)
}

fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Duality map of `ℓ_p`: for `‖x‖_p = 1` returns `φ` with `‖φ‖_q = 1`,
/// `φ^H x = 1`.
fn lp_duality_map<S: Scalar>(x: &[S], p: f64) -> Vec<S> {
    let n = p_norm(x, p);
    x.iter()
        .map(|z| {
            let m = z.modulus();
            if m == 0.0 {
                S::zero()
            } else {
                z.scale(libm::pow(m, p - 2.0) / libm::pow(n, p - 1.0))
            }
        })
        .collect()
}

fn odometer_product<S: Scalar>(lists: &[Vec<Vec<S>>]) -> Vec<Vec<S>> {
    let mut out = Vec::new();
    if lists.iter().any(|l| l.is_empty()) {
        return out;
    }
    let mut idx = vec![0usize; lists.len()];
    loop {
        let mut v = Vec::new();
        for (l, &i) in lists.iter().zip(&idx) {
            v.extend_from_slice(&l[i]);
        }
        out.push(v);
        let mut k = lists.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn inject<S: Scalar>(dim: usize, offset: usize, part: &[S]) -> Vec<S> {
    let mut v = vec![S::zero(); dim];
    v[offset..offset + part.len()].copy_from_slice(part);
    v
}

fn unit_functional<S: Scalar>(g: &Geometry) -> Vec<S> {
    let mut e = vec![S::zero(); g.dim()];
    if !e.is_empty() {
        e[0] = S::one();
    }
    let n = g.dual_norm(&e);
    e.into_iter().map(|z| z.unscale(n)).collect()
}

fn saturating_product(values: impl Iterator<Item = Option<u128>>) -> Option<u128> {
    let mut acc: u128 = 1;
    for v in values {
        acc = acc.saturating_mul(v?);
    }
    Some(acc)
}

fn saturating_sum(values: impl Iterator<Item = Option<u128>>) -> Option<u128> {
    let mut acc: u128 = 0;
    for v in values {
        acc = acc.saturating_add(v?);
    }
    Some(acc)
}

impl Geometry {
    pub fn dim(&self) -> usize {
        match self {
            Geometry::Poly(p) => p.dim,
            Geometry::Hilbert { dim } | Geometry::Smooth { dim, .. } => *dim,
            Geometry::Sum(s) => s.dim,
        }
    }

    /// Geometry of the dual space.
    pub fn dual(&self) -> Geometry {
        match self {
            Geometry::Poly(p) => Geometry::Poly(PolyLeaf::assemble(
                p.dim,
                p.facets.clone(),
                p.vertices.clone(),
            )),
            Geometry::Hilbert { dim } => Geometry::Hilbert { dim: *dim },
            Geometry::Smooth { p, dim } => Geometry::Smooth {
                p: conjugate_exponent(*p),
                dim: *dim,
            },
            Geometry::Sum(s) => Geometry::Sum(SumGeometry::new(
                match s.kind {
                    SumKind::L1 => SumKind::Linf,
                    SumKind::Linf => SumKind::L1,
                },
                s.parts.iter().map(Geometry::dual).collect(),
            )),
        }
    }

    pub fn is_hilbert(&self) -> bool {
        matches!(self, Geometry::Hilbert { .. })
    }

    /// Whether every leaf is a polytope.
    pub fn is_polyhedral(&self) -> bool {
        match self {
            Geometry::Poly(_) => true,
            Geometry::Sum(s) => s.parts.iter().all(Geometry::is_polyhedral),
            _ => false,
        }
    }

    pub fn has_smooth_leaf(&self) -> bool {
        match self {
            Geometry::Smooth { .. } => true,
            Geometry::Sum(s) => s.parts.iter().any(Geometry::has_smooth_leaf),
            _ => false,
        }
    }

    pub fn norm<S: Scalar>(&self, x: &[S]) -> f64 {
        match self {
            Geometry::Poly(p) => p.gauge(x),
            Geometry::Hilbert { .. } => euclid(x),
            Geometry::Smooth { p, .. } => p_norm(x, *p),
            Geometry::Sum(s) => {
                let it = s
                    .parts
                    .iter()
                    .enumerate()
                    .map(|(i, g)| g.norm(&x[s.range(i)]));
                match s.kind {
                    SumKind::L1 => it.sum(),
                    SumKind::Linf => it.fold(0.0, f64::max),
                }
            }
        }
    }

    pub fn dual_norm<S: Scalar>(&self, phi: &[S]) -> f64 {
        match self {
            Geometry::Poly(p) => p.dual_gauge(phi),
            Geometry::Hilbert { .. } => euclid(phi),
            Geometry::Smooth { p, .. } => p_norm(phi, conjugate_exponent(*p)),
            Geometry::Sum(s) => {
                let it = s
                    .parts
                    .iter()
                    .enumerate()
                    .map(|(i, g)| g.dual_norm(&phi[s.range(i)]));
                match s.kind {
                    SumKind::L1 => it.fold(0.0, f64::max),
                    SumKind::Linf => it.sum(),
                }
            }
        }
    }

    /// A norm-one functional `φ` with `φ^H x = ‖x‖`.
    pub fn norming_functional<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        match self {
            Geometry::Poly(p) => {
                let xr = real_parts(x);
                let mut best = (0usize, -1.0);
                for (i, w) in p.facets.iter().enumerate() {
                    let v = real_dot(w, &xr);
                    if v > best.1 {
                        best = (i, v);
                    }
                }
                to_scalars(&p.facets[best.0])
            }
            Geometry::Hilbert { .. } => {
                let n = euclid(x);
                if n == 0.0 {
                    return unit_functional(self);
                }
                x.iter().map(|z| z.unscale(n)).collect()
            }
            Geometry::Smooth { p, .. } => {
                if p_norm(x, *p) == 0.0 {
                    return unit_functional(self);
                }
                lp_duality_map(x, *p)
            }
            Geometry::Sum(s) => match s.kind {
                SumKind::L1 => {
                    let mut out = Vec::with_capacity(s.dim);
                    for (i, g) in s.parts.iter().enumerate() {
                        out.extend(g.norming_functional(&x[s.range(i)]));
                    }
                    out
                }
                SumKind::Linf => {
                    let (j, _) = s.parts.iter().enumerate().fold((0, -1.0), |b, (i, g)| {
                        let n = g.norm(&x[s.range(i)]);
                        if n > b.1 {
                            (i, n)
                        } else {
                            b
                        }
                    });
                    let f = s.parts[j].norming_functional(&x[s.range(j)]);
                    inject(s.dim, s.offsets[j], &f)
                }
            },
        }
    }

    /// A unit vector `x` with `φ^H x = ‖φ‖_*`.
    pub fn norming_vector<S: Scalar>(&self, phi: &[S]) -> Vec<S> {
        match self {
            Geometry::Poly(p) => {
                let fr = real_parts(phi);
                let mut best = (0usize, -1.0);
                for (i, v) in p.vertices.iter().enumerate() {
                    let val = real_dot(v, &fr);
                    if val > best.1 {
                        best = (i, val);
                    }
                }
                to_scalars(&p.vertices[best.0])
            }
            Geometry::Hilbert { dim } => {
                let n = euclid(phi);
                if n == 0.0 {
                    let mut e = vec![S::zero(); *dim];
                    e[0] = S::one();
                    return e;
                }
                phi.iter().map(|z| z.unscale(n)).collect()
            }
            Geometry::Smooth { p, dim } => {
                let q = conjugate_exponent(*p);
                if p_norm(phi, q) == 0.0 {
                    let mut e = vec![S::zero(); *dim];
                    e[0] = S::one();
                    return e;
                }
                lp_duality_map(phi, q)
            }
            Geometry::Sum(s) => match s.kind {
                SumKind::Linf => {
                    let mut out = Vec::with_capacity(s.dim);
                    for (i, g) in s.parts.iter().enumerate() {
                        out.extend(g.norming_vector(&phi[s.range(i)]));
                    }
                    out
                }
                SumKind::L1 => {
                    let (j, _) = s.parts.iter().enumerate().fold((0, -1.0), |b, (i, g)| {
                        let n = g.dual_norm(&phi[s.range(i)]);
                        if n > b.1 {
                            (i, n)
                        } else {
                            b
                        }
                    });
                    let v = s.parts[j].norming_vector(&phi[s.range(j)]);
                    inject(s.dim, s.offsets[j], &v)
                }
            },
        }
    }

    /// Number of extreme points of the unit ball, `None` when infinite.
    pub fn ext_count(&self) -> Option<u128> {
        match self {
            Geometry::Poly(p) => Some(p.vertices.len() as u128),
            Geometry::Hilbert { .. } | Geometry::Smooth { .. } => None,
            Geometry::Sum(s) => match s.kind {
                SumKind::L1 => saturating_sum(s.parts.iter().map(Geometry::ext_count)),
                SumKind::Linf => saturating_product(s.parts.iter().map(Geometry::ext_count)),
            },
        }
    }

    /// Number of extreme points of the dual unit ball, `None` when infinite.
    pub fn dual_ext_count(&self) -> Option<u128> {
        match self {
            Geometry::Poly(p) => Some(p.facets.len() as u128),
            Geometry::Hilbert { .. } | Geometry::Smooth { .. } => None,
            Geometry::Sum(s) => match s.kind {
                SumKind::L1 => saturating_product(s.parts.iter().map(Geometry::dual_ext_count)),
                SumKind::Linf => saturating_sum(s.parts.iter().map(Geometry::dual_ext_count)),
            },
        }
    }

    /// Extreme points of `B_X` when finitely many, else a sphere sample of
    /// roughly `budget` points per smooth leaf.
    pub fn ext_points<S: Scalar>(&self, budget: usize) -> PointSet<S> {
        match self {
            Geometry::Poly(p) => PointSet {
                points: p.vertices.iter().map(|v| to_scalars(v)).collect(),
                exact: true,
            },
            Geometry::Hilbert { dim } => PointSet {
                points: sphere_directions(*dim, budget),
                exact: false,
            },
            Geometry::Smooth { p, dim } => PointSet {
                points: sphere_directions::<S>(*dim, budget)
                    .into_iter()
                    .map(|v| {
                        let n = p_norm(&v, *p);
                        v.into_iter().map(|z| z.unscale(n)).collect()
                    })
                    .collect(),
                exact: false,
            },
            Geometry::Sum(s) => {
                let sets: Vec<PointSet<S>> = s.parts.iter().map(|g| g.ext_points(budget)).collect();
                let exact = sets.iter().all(|p| p.exact);
                let points = match s.kind {
                    SumKind::L1 => sets
                        .iter()
                        .enumerate()
                        .flat_map(|(i, ps)| {
                            ps.points.iter().map(move |v| inject(s.dim, s.offsets[i], v))
                        })
                        .collect(),
                    SumKind::Linf => {
                        let lists: Vec<Vec<Vec<S>>> = sets.into_iter().map(|p| p.points).collect();
                        odometer_product(&lists)
                    }
                };
                PointSet { points, exact }
            }
        }
    }

    /// Extreme points of `B_{X*}` (as functional vectors), or a sample.
    pub fn dual_ext_points<S: Scalar>(&self, budget: usize) -> PointSet<S> {
        match self {
            Geometry::Poly(p) => PointSet {
                points: p.facets.iter().map(|v| to_scalars(v)).collect(),
                exact: true,
            },
            Geometry::Hilbert { dim } => PointSet {
                points: sphere_directions(*dim, budget),
                exact: false,
            },
            Geometry::Smooth { p, dim } => {
                let q = conjugate_exponent(*p);
                PointSet {
                    points: sphere_directions::<S>(*dim, budget)
                        .into_iter()
                        .map(|v| {
                            let n = p_norm(&v, q);
                            v.into_iter().map(|z| z.unscale(n)).collect()
                        })
                        .collect(),
                    exact: false,
                }
            }
            Geometry::Sum(s) => {
                let sets: Vec<PointSet<S>> =
                    s.parts.iter().map(|g| g.dual_ext_points(budget)).collect();
                let exact = sets.iter().all(|p| p.exact);
                let points = match s.kind {
                    SumKind::Linf => sets
                        .iter()
                        .enumerate()
                        .flat_map(|(i, ps)| {
                            ps.points.iter().map(move |v| inject(s.dim, s.offsets[i], v))
                        })
                        .collect(),
                    SumKind::L1 => {
                        let lists: Vec<Vec<Vec<S>>> = sets.into_iter().map(|p| p.points).collect();
                        odometer_product(&lists)
                    }
                };
                PointSet { points, exact }
            }
        }
    }

    /// Size of the pair list [`Geometry::pairs`] would produce, when finite.
    pub fn pair_count(&self) -> Option<u128> {
        match self {
            Geometry::Poly(p) => Some(p.vertex_faces.iter().map(|f| f.len() as u128).sum()),
            Geometry::Hilbert { .. } | Geometry::Smooth { .. } => None,
            Geometry::Sum(s) => {
                let mut total: u128 = 0;
                for (i, g) in s.parts.iter().enumerate() {
                    let others = saturating_product(s.parts.iter().enumerate().filter(|(k, _)| *k != i).map(
                        |(_, h)| match s.kind {
                            SumKind::L1 => h.dual_ext_count(),
                            SumKind::Linf => h.ext_count(),
                        },
                    ))?;
                    total = total.saturating_add(g.pair_count()?.saturating_mul(others));
                }
                Some(total)
            }
        }
    }

    /// Duality pairs `(x, φ)`: the exact extreme pairs for polyhedral
    /// geometry, sampled pairs over smooth leaves.
    pub fn pairs<S: Scalar>(&self, budget: usize, extra: &[Vec<S>]) -> Result<(Vec<Pair<S>>, bool)> {
        match self {
            Geometry::Poly(p) => {
                let mut out = Vec::new();
                for (v, faces) in p.vertices.iter().zip(&p.vertex_faces) {
                    for &f in faces {
                        out.push((to_scalars(v), to_scalars(&p.facets[f])));
                    }
                }
                Ok((out, true))
            }
            Geometry::Hilbert { dim } => {
                let mut pts: Vec<Vec<S>> = sphere_directions(*dim, budget);
                for e in extra {
                    let n = euclid(e);
                    if n > 0.0 {
                        pts.push(e.iter().map(|z| z.unscale(n)).collect());
                    }
                }
                Ok((pts.into_iter().map(|x| (x.clone(), x)).collect(), false))
            }
            Geometry::Smooth { p, dim } => {
                let mut pts: Vec<Vec<S>> = sphere_directions(*dim, budget);
                pts.extend(extra.iter().cloned());
                let out = pts
                    .into_iter()
                    .filter(|x| p_norm(x, *p) > 0.0)
                    .map(|x| {
                        let n = p_norm(&x, *p);
                        let x: Vec<S> = x.into_iter().map(|z| z.unscale(n)).collect();
                        let f = lp_duality_map(&x, *p);
                        (x, f)
                    })
                    .collect();
                Ok((out, false))
            }
            Geometry::Sum(s) => {
                if let Some(c) = self.pair_count() {
                    if c > ENUMERATION_CAP {
                        return Err(capability("pair enumeration exceeds the enumeration cap"));
                    }
                }
                let mut out = Vec::new();
                let mut exact = true;
                for (i, g) in s.parts.iter().enumerate() {
                    let part_extra: Vec<Vec<S>> = extra
                        .iter()
                        .filter(|e| e.len() == s.dim)
                        .map(|e| e[s.range(i)].to_vec())
                        .collect();
                    let (pp, ex) = g.pairs(budget, &part_extra)?;
                    exact &= ex;
                    let mut lists: Vec<Vec<Vec<S>>> = Vec::with_capacity(s.parts.len());
                    for (k, h) in s.parts.iter().enumerate() {
                        if k == i {
                            lists.push(vec![Vec::new()]);
                            continue;
                        }
                        let set = match s.kind {
                            SumKind::L1 => h.dual_ext_points(budget),
                            SumKind::Linf => h.ext_points(budget),
                        };
                        exact &= set.exact;
                        lists.push(set.points);
                    }
                    let completions = odometer_product(&lists);
                    if (out.len() as u128)
                        .saturating_add((pp.len() as u128).saturating_mul(completions.len() as u128))
                        > ENUMERATION_CAP
                    {
                        return Err(capability("pair enumeration exceeds the enumeration cap"));
                    }
                    for (x, f) in &pp {
                        for c in &completions {
                            // `c` lacks part i's block; splice it in
                            let lo = s.offsets[i];
                            let mut full = Vec::with_capacity(s.dim);
                            full.extend_from_slice(&c[..lo]);
                            match s.kind {
                                SumKind::L1 => {
                                    full.extend_from_slice(f);
                                    full.extend_from_slice(&c[lo..]);
                                    out.push((inject(s.dim, lo, x), full));
                                }
                                SumKind::Linf => {
                                    full.extend_from_slice(x);
                                    full.extend_from_slice(&c[lo..]);
                                    out.push((full, inject(s.dim, lo, f)));
                                }
                            }
                        }
                    }
                }
                Ok((out, exact))
            }
        }
    }
}

/// One element of a numerical range together with the disc of values
/// reachable by completing the state on the other summands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disc {
    pub center: num_complex::Complex64,
    pub radius: f64,
}

impl Geometry {
    /// Values `φ^H T x` over duality pairs, with completion radii on sums.
    /// For real scalars the discs are intervals whose endpoints are attained.
    pub fn range_discs<S: Scalar>(&self, t: &DMatrix<S>, budget: usize, extra: &[Vec<S>]) -> Result<(Vec<Disc>, bool)> {
        match self {
            Geometry::Sum(s) => {
                let n = s.parts.len();
                let d = s.dim;
                let mut discs = Vec::new();
                let mut exact = true;
                let mut full = vec![S::zero(); d];
                for (i, g) in s.parts.iter().enumerate() {
                    let ri = s.range(i);
                    let part_extra: Vec<Vec<S>> = extra
                        .iter()
                        .filter(|e| e.len() == s.dim)
                        .map(|e| e[ri.clone()].to_vec())
                        .collect();
                    let (pairs, ex) = g.pairs(budget, &part_extra)?;
                    exact &= ex;
                    for (x, f) in &pairs {
                        let (center, radius) = match s.kind {
                            SumKind::L1 => {
                                // u = T[:, i] x
                                for (r, u) in full.iter_mut().enumerate() {
                                    *u = ri.clone().zip(x).fold(S::zero(), |acc, (c, xc)| acc + t[(r, c)] * *xc);
                                }
                                let radius: f64 = (0..n)
                                    .filter(|&k| k != i)
                                    .map(|k| s.parts[k].norm(&full[s.range(k)]))
                                    .sum();
                                (pairing(f, &full[ri.clone()]), radius)
                            }
                            SumKind::Linf => {
                                // w = T[i, :]^H f
                                for (c, w) in full.iter_mut().enumerate() {
                                    *w = ri
                                        .clone()
                                        .zip(f)
                                        .fold(S::zero(), |acc, (r, fr)| acc + t[(r, c)].conjugate() * *fr);
                                }
                                let radius: f64 = (0..n)
                                    .filter(|&k| k != i)
                                    .map(|k| s.parts[k].dual_norm(&full[s.range(k)]))
                                    .sum();
                                (pairing(&full[ri.clone()], x), radius)
                            }
                        };
                        discs.push(Disc {
                            center: center.to_complex(),
                            radius,
                        });
                    }
                }
                Ok((discs, exact))
            }
            _ => {
                let (pairs, exact) = self.pairs(budget, extra)?;
                let discs = pairs
                    .iter()
                    .map(|(x, f)| Disc {
                        center: pairing(f, &mat_vec(t, x)).to_complex(),
                        radius: 0.0,
                    })
                    .collect();
                Ok((discs, exact))
            }
        }
    }
}

/// A sparse linear constraint on the entries of a `d×d` real matrix,
/// indexed `r·d + c`.
pub(crate) type SparseRow = Vec<(usize, f64)>;

impl Geometry {
    /// Linear constraints cutting out the real skew-hermitian operators
    /// (`v(T) = 0`) on the block at `offset`. Entries forced to vanish are
    /// flagged in `zero` instead of receiving a row.
    pub fn lie_constraints(
        &self,
        offset: usize,
        d: usize,
        rows: &mut Vec<SparseRow>,
        zero: &mut [bool],
    ) -> Result<()> {
        match self {
            Geometry::Poly(p) => {
                for (v, faces) in p.vertices.iter().zip(&p.vertex_faces) {
                    for &f in faces {
                        let w = &p.facets[f];
                        let mut row = Vec::new();
                        for (r, wr) in w.iter().enumerate() {
                            for (c, vc) in v.iter().enumerate() {
                                let coef = wr * vc;
                                if coef != 0.0 {
                                    row.push(((offset + r) * d + offset + c, coef));
                                }
                            }
                        }
                        rows.push(row);
                    }
                }
                Ok(())
            }
            Geometry::Hilbert { dim } => {
                for r in 0..*dim {
                    for c in r..*dim {
                        let a = (offset + r) * d + offset + c;
                        let b = (offset + c) * d + offset + r;
                        if a == b {
                            zero[a] = true;
                        } else {
                            rows.push(alloc::vec![(a, 1.0), (b, 1.0)]);
                        }
                    }
                }
                Ok(())
            }
            Geometry::Smooth { .. } => Err(capability(
                "isometry Lie algebras of non-Euclidean smooth norms are not computed",
            )),
            Geometry::Sum(s) => {
                for (i, g) in s.parts.iter().enumerate() {
                    g.lie_constraints(offset + s.offsets[i], d, rows, zero)?;
                    for (k, _) in s.parts.iter().enumerate().filter(|(k, _)| *k != i) {
                        for r in s.range(k) {
                            for c in s.range(i) {
                                zero[(offset + r) * d + offset + c] = true;
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

fn nonzero_blocks<S: Scalar>(t: &DMatrix<S>, s: &SumGeometry, columns: bool) -> Vec<usize> {
    (0..s.parts.len())
        .filter(|&i| {
            let r = s.range(i);
            let view = if columns {
                t.view((0, r.start), (t.nrows(), r.len()))
            } else {
                t.view((r.start, 0), (r.len(), t.ncols()))
            };
            view.iter().any(|v| v.modulus() != 0.0)
        })
        .collect()
}

fn select_columns<S: Scalar>(t: &DMatrix<S>, idx: &[usize]) -> DMatrix<S> {
    DMatrix::from_fn(t.nrows(), idx.len(), |r, c| t[(r, idx[c])])
}

fn select_rows<S: Scalar>(t: &DMatrix<S>, idx: &[usize]) -> DMatrix<S> {
    DMatrix::from_fn(idx.len(), t.ncols(), |r, c| t[(idx[r], c)])
}

/// Iterations of the alternating norming-map ascent used for sampled
/// operator norms.
const ASCENT_STEPS: usize = 60;
/// Cap on extreme points scanned for an exact operator norm.
const OP_NORM_SCAN_CAP: u128 = 1 << 18;

/// `‖T‖` for `T : dom → cod`.
pub(crate) fn op_norm<S: Scalar>(dom: &Geometry, cod: &Geometry, t: &DMatrix<S>, budget: usize) -> Estimate {
    if is_zero(t) {
        return Estimate::exact(0.0);
    }
    if let Geometry::Sum(s) = dom {
        let nz = nonzero_blocks(t, s, true);
        match s.kind {
            SumKind::L1 => {
                let mut best = Estimate::exact(0.0);
                for i in nz {
                    let cols: Vec<usize> = s.range(i).collect();
                    let e = op_norm(&s.parts[i], cod, &select_columns(t, &cols), budget);
                    best = Estimate {
                        value: best.value.max(e.value),
                        exact: best.exact && e.exact,
                    };
                }
                return best;
            }
            SumKind::Linf if nz.len() < s.parts.len() => {
                let (g, cols) = s.restrict(&nz);
                return op_norm(&g, cod, &select_columns(t, &cols), budget);
            }
            _ => {}
        }
    }
    if let Geometry::Sum(s) = cod {
        let nz = nonzero_blocks(t, s, false);
        match s.kind {
            SumKind::Linf => {
                let mut best = Estimate::exact(0.0);
                for k in nz {
                    let rows: Vec<usize> = s.range(k).collect();
                    let e = op_norm(dom, &s.parts[k], &select_rows(t, &rows), budget);
                    best = Estimate {
                        value: best.value.max(e.value),
                        exact: best.exact && e.exact,
                    };
                }
                return best;
            }
            SumKind::L1 if nz.len() < s.parts.len() => {
                let (g, rows) = s.restrict(&nz);
                return op_norm(dom, &g, &select_rows(t, &rows), budget);
            }
            _ => {}
        }
    }
    if dom.is_hilbert() && cod.is_hilbert() {
        return Estimate::exact(crate::linalg::spectral_norm(t));
    }
    let via_domain = dom.ext_count().filter(|c| *c <= OP_NORM_SCAN_CAP);
    let via_dual = cod.dual_ext_count().filter(|c| *c <= OP_NORM_SCAN_CAP);
    match (via_domain, via_dual) {
        (Some(a), Some(b)) if a <= b => return Estimate::exact(scan_domain(dom, cod, t)),
        (Some(_), None) => return Estimate::exact(scan_domain(dom, cod, t)),
        (_, Some(_)) => {
            let ext = cod.dual_ext_points::<S>(0).points;
            let v = ext
                .iter()
                .map(|psi| dom.dual_norm(&adjoint_vec(t, psi)))
                .fold(0.0, f64::max);
            return Estimate::exact(v);
        }
        _ => {}
    }
    Estimate::sampled(sampled_op_norm(dom, cod, t, budget))
}

fn scan_domain<S: Scalar>(dom: &Geometry, cod: &Geometry, t: &DMatrix<S>) -> f64 {
    dom.ext_points::<S>(0)
        .points
        .iter()
        .map(|x| cod.norm(&mat_vec(t, x)))
        .fold(0.0, f64::max)
}

/// Lower bound for `‖T‖` from sphere samples refined by the alternating
/// ascent `x ← J_X*(T^H J_Y(Tx))`, which never decreases `‖Tx‖`.
pub(crate) fn sampled_op_norm<S: Scalar>(dom: &Geometry, cod: &Geometry, t: &DMatrix<S>, budget: usize) -> f64 {
    let pts = dom.ext_points::<S>(budget.max(16)).points;
    let mut scored: Vec<(f64, Vec<S>)> = pts
        .into_iter()
        .map(|x| (cod.norm(&mat_vec(t, &x)), x))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut best = scored.first().map(|s| s.0).unwrap_or(0.0);
    if dom.is_hilbert() {
        // spectral start: the top right singular vector is often near-optimal
        let (_, v) = spectral_norm_with_vector(t);
        let v: Vec<S> = v.iter().copied().collect();
        scored.push((cod.norm(&mat_vec(t, &v)), v));
    }
    let starts = scored.len().min(8);
    let extra_start = if dom.is_hilbert() { scored.pop() } else { None };
    let mut seeds: Vec<Vec<S>> = scored.into_iter().take(starts).map(|s| s.1).collect();
    if let Some(e) = extra_start {
        seeds.push(e.1);
    }
    for mut x in seeds {
        for _ in 0..ASCENT_STEPS {
            let y = mat_vec(t, &x);
            let psi = cod.norming_functional(&y);
            let z = adjoint_vec(t, &psi);
            let nx = dom.norming_vector(&z);
            let val = cod.norm(&mat_vec(t, &nx));
            if val <= best * (1.0 + 1e-15) && val <= cod.norm(&y) {
                best = best.max(val);
                break;
            }
            best = best.max(val);
            x = nx;
        }
    }
    best
}

/// Builds the geometry of `Lp(p)` of dimension `dim`.
pub(crate) fn lp_geometry(p: Option<f64>, dim: usize, complex: bool) -> Geometry {
    let scalar_leaf = || {
        if complex {
            Geometry::Hilbert { dim: 1 }
        } else {
            Geometry::Poly(PolyLeaf::segment(1.0))
        }
    };
    if dim == 1 {
        return scalar_leaf();
    }
    match p {
        None => Geometry::Sum(SumGeometry::new(
            SumKind::Linf,
            (0..dim).map(|_| scalar_leaf()).collect(),
        )),
        Some(p) if p == 1.0 => Geometry::Sum(SumGeometry::new(
            SumKind::L1,
            (0..dim).map(|_| scalar_leaf()).collect(),
        )),
        Some(p) if p == 2.0 => Geometry::Hilbert { dim },
        Some(p) => Geometry::Smooth { p, dim },
    }
}

/// Groups coordinates `0..dim` into classes linked by common support in
/// `vectors`; returns contiguous ranges, or `None` when some class is not
/// a contiguous range.
fn contiguous_components(vectors: &[Vec<f64>], dim: usize) -> Option<Vec<core::ops::Range<usize>>> {
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for v in vectors {
        let support: Vec<usize> = (0..dim).filter(|&i| v[i] != 0.0).collect();
        for w in support.windows(2) {
            let a = find(&mut parent, w[0]);
            let b = find(&mut parent, w[1]);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let roots: Vec<usize> = (0..dim).map(|i| find(&mut parent, i)).collect();
    let mut ranges = Vec::new();
    let mut start = 0;
    for i in 1..=dim {
        if i == dim || roots[i] != roots[start] {
            ranges.push(start..i);
            start = i;
        }
    }
    // every class must occupy exactly one range
    for (a, r) in ranges.iter().enumerate() {
        for r2 in ranges.iter().skip(a + 1) {
            if roots[r.start] == roots[r2.start] {
                return None;
            }
        }
    }
    Some(ranges)
}

/// Geometry of `conv(±points)`, split into an `ℓ₁`-sum when the points have
/// block-disjoint supports, or an `ℓ∞`-sum when the facets do.
pub(crate) fn polyhedral_geometry(points: &[Vec<f64>], dim: usize) -> Result<(Geometry, Vec<Vec<f64>>)> {
    for p in points {
        if p.len() != dim {
            return Err(construction("polyhedral vertices have inconsistent lengths"));
        }
    }
    let nonzero: Vec<Vec<f64>> = points
        .iter()
        .filter(|p| p.iter().any(|v| *v != 0.0))
        .cloned()
        .collect();
    if let Some(ranges) = contiguous_components(&nonzero, dim) {
        if ranges.len() > 1 {
            let mut parts = Vec::with_capacity(ranges.len());
            let mut canonical: Vec<Vec<f64>> = Vec::new();
            for r in &ranges {
                let sub: Vec<Vec<f64>> = nonzero
                    .iter()
                    .filter(|p| p[r.clone()].iter().any(|v| *v != 0.0))
                    .map(|p| p[r.clone()].to_vec())
                    .collect();
                let (g, verts) = polyhedral_geometry(&sub, r.len())?;
                for v in verts {
                    canonical.push(inject(dim, r.start, &v));
                }
                parts.push(g);
            }
            canonical.sort_by(|a, b| crate::polytope::lex_cmp(a, b));
            return Ok((Geometry::Sum(SumGeometry::new(SumKind::L1, parts)), canonical));
        }
    }
    let leaf = PolyLeaf::from_vertices(points, dim)?;
    let vertices = leaf.vertices.clone();
    if dim > 1 {
        if let Some(ranges) = contiguous_components(&leaf.facets, dim) {
            if ranges.len() > 1 {
                let parts = ranges
                    .iter()
                    .map(|r| {
                        let sub: Vec<Vec<f64>> = leaf
                            .facets
                            .iter()
                            .filter(|p| p[r.clone()].iter().any(|v| *v != 0.0))
                            .map(|p| p[r.clone()].to_vec())
                            .collect();
                        facet_leaf(&sub, r.len())
                    })
                    .collect::<Result<Vec<_>>>()?;
                return Ok((Geometry::Sum(SumGeometry::new(SumKind::Linf, parts)), vertices));
            }
        }
    }
    Ok((Geometry::Poly(leaf), vertices))
}

fn facet_leaf(normals: &[Vec<f64>], dim: usize) -> Result<Geometry> {
    if dim == 1 {
        let s = normals.iter().fold(0.0f64, |m, v| m.max(v[0].abs()));
        if s == 0.0 {
            return Err(construction("sup-subspace basis is rank deficient"));
        }
        return Ok(Geometry::Poly(PolyLeaf::segment(s)));
    }
    Ok(Geometry::Poly(PolyLeaf::from_facets(normals, dim)?))
}

/// Geometry of the subspace of `ℓ∞^nodes` spanned by the columns of `rows`
/// (one row per node), split into `ℓ∞` components by column support.
pub(crate) fn sup_subspace_geometry(rows: &[Vec<f64>], dim: usize) -> Result<Geometry> {
    if rank_of_rows(rows, dim) < dim {
        return Err(construction("sup-subspace basis does not have full column rank"));
    }
    let nonzero: Vec<Vec<f64>> = rows
        .iter()
        .filter(|p| p.iter().any(|v| *v != 0.0))
        .cloned()
        .collect();
    let ranges = contiguous_components(&nonzero, dim).unwrap_or_else(|| alloc::vec![0..dim]);
    let mut parts = Vec::with_capacity(ranges.len());
    for r in &ranges {
        let sub: Vec<Vec<f64>> = nonzero
            .iter()
            .filter(|p| p[r.clone()].iter().any(|v| *v != 0.0))
            .map(|p| p[r.clone()].to_vec())
            .collect();
        parts.push(facet_leaf(&sub, r.len())?);
    }
    if parts.len() == 1 {
        return Ok(parts.pop().expect("one part"));
    }
    Ok(Geometry::Sum(SumGeometry::new(SumKind::Linf, parts)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_detect_blocks() {
        let v = vec![vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(contiguous_components(&v, 3), Some(vec![0..2, 2..3]));
        let w = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(contiguous_components(&w, 3), None);
    }

    #[test]
    fn cube_polytope_splits_into_segments() {
        let mut cube = Vec::new();
        for s in 0..8 {
            cube.push(
                (0..3)
                    .map(|i| if s >> i & 1 == 1 { 2.0 } else { -2.0 })
                    .collect::<Vec<_>>(),
            );
        }
        let (g, verts) = polyhedral_geometry(&cube, 3).unwrap();
        assert_eq!(verts.len(), 8);
        match &g {
            Geometry::Sum(s) => {
                assert_eq!(s.kind, SumKind::Linf);
                assert_eq!(s.parts.len(), 3);
            }
            other => panic!("{other:?}"),
        }
        assert!((g.norm(&[1.0, -4.0, 0.5]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_norm_is_a_lower_bound_and_tight_for_diagonals() {
        let g = Geometry::Smooth { p: 3.0, dim: 2 };
        let t = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let v = sampled_op_norm(&g, &g, &t, 64);
        assert!(v <= 2.0 + 1e-12 && v > 2.0 - 1e-9);
    }
}
