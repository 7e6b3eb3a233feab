//! Numerical ranges, numerical radii, the exponential formula and the
//! Daugavet equation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{capability, Result};
use crate::linalg::{hermitian_eigen, hermitian_part, mat_vec};
use crate::operators::{expm, op_norm, op_norm_with, Operator, DEFAULT_BUDGET};
use crate::scalar::{pairing, Scalar};
use crate::spaces::covering::sphere_directions;
use crate::spaces::{Disc, Estimate, NormedSpace};

/// Initial number of angles in the complex Euclidean radius search.
pub const THETA_GRID_START: usize = 64;
/// Hard cap on the angle grid.
pub const THETA_GRID_CAP: usize = 1 << 16;
/// Stabilization threshold between successive grid levels.
pub const THETA_STABLE_TOL: f64 = 1e-9;

/// Statistics of `V(T)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeSummary {
    /// `v(T)`.
    pub radius: f64,
    pub sup_re: f64,
    pub inf_re: f64,
    /// Elements of `V(T)`.
    pub samples: Vec<Complex64>,
    /// Every element of `V(T)` lies in one of these discs, and every disc
    /// lies in the closed convex hull of `V(T)`.
    pub discs: Vec<Disc>,
    pub exact: bool,
    /// Set when the complex angle search hit its grid cap.
    pub reduced_accuracy: bool,
}

impl RangeSummary {
    /// Support function `h(u) = sup { Re(conj(u)·λ) : λ ∈ V(T) }`.
    pub fn support(&self, u: Complex64) -> f64 {
        let from_discs = self
            .discs
            .iter()
            .map(|d| (u.conj() * d.center).re + d.radius * u.norm())
            .fold(f64::NEG_INFINITY, f64::max);
        let from_samples = self
            .samples
            .iter()
            .map(|s| (u.conj() * s).re)
            .fold(f64::NEG_INFINITY, f64::max);
        from_discs.max(from_samples)
    }
}

fn stats_from_discs(discs: &[Disc]) -> (f64, f64, f64) {
    let mut radius: f64 = 0.0;
    let mut sup_re = f64::NEG_INFINITY;
    let mut inf_re = f64::INFINITY;
    for d in discs {
        radius = radius.max(d.center.norm() + d.radius);
        sup_re = sup_re.max(d.center.re + d.radius);
        inf_re = inf_re.min(d.center.re - d.radius);
    }
    (radius, sup_re, inf_re)
}

fn disc_samples<S: Scalar>(discs: &[Disc]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(discs.len());
    for d in discs {
        out.push(d.center);
        if d.radius > 0.0 {
            if S::IS_COMPLEX {
                for k in 0..8 {
                    let a = PI * k as f64 / 4.0;
                    out.push(d.center + Complex64::from_polar(d.radius, a));
                }
            } else {
                out.push(d.center + d.radius);
                out.push(d.center - d.radius);
            }
        }
    }
    out
}

/// Largest eigenvalue of `Re(e^{iθ}T)` and a top eigenvector.
fn rotated_top<S: Scalar>(t: &DMatrix<S>, theta: f64) -> (f64, Vec<S>) {
    let rot = S::from_parts(libm::cos(theta), libm::sin(theta));
    let h = hermitian_part(&(t * rot));
    let (vals, vecs) = hermitian_eigen(&h);
    let last = vals.len() - 1;
    (vals[last], vecs[last].iter().copied().collect())
}

/// `max_θ λ_max(Re(e^{iθ}T))` by a doubling angle grid with local
/// golden-section refinement.
fn complex_euclidean_radius<S: Scalar>(t: &DMatrix<S>) -> (f64, f64, bool) {
    let f = |th: f64| rotated_top(t, th).0;
    let mut n = THETA_GRID_START;
    let mut prev = f64::NEG_INFINITY;
    let mut best = (f64::NEG_INFINITY, 0.0);
    loop {
        let h = 2.0 * PI / n as f64;
        let mut level = (f64::NEG_INFINITY, 0.0);
        for k in 0..n {
            let th = h * k as f64;
            let v = f(th);
            if v > level.0 {
                level = (v, th);
            }
        }
        // golden-section refinement on the bracketing cell
        let (mut a, mut b) = (level.1 - h, level.1 + h);
        let g = 0.5 * (libm::sqrt(5.0) - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..80 {
            if (b - a).abs() < 1e-8 {
                break;
            }
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        for (v, th) in [(fc, c), (fd, d)] {
            if v > level.0 {
                level = (v, th);
            }
        }
        if level.0 > best.0 {
            best = level;
        }
        if (level.0 - prev).abs() < THETA_STABLE_TOL {
            return (best.0, best.1, false);
        }
        if n >= THETA_GRID_CAP {
            return (best.0, best.1, true);
        }
        prev = level.0;
        n *= 2;
    }
}

fn euclidean_summary<S: Scalar>(t: &DMatrix<S>, budget: usize) -> RangeSummary {
    let n = t.nrows();
    let h = hermitian_part(t);
    let (vals, vecs) = hermitian_eigen(&h);
    let sup_re = vals[n - 1];
    let inf_re = vals[0];
    let mut states: Vec<Vec<S>> = sphere_directions(n, budget.max(1));
    states.extend(vecs.iter().map(|v| v.iter().copied().collect::<Vec<S>>()));
    let (radius, reduced_accuracy) = if S::IS_COMPLEX {
        let (r, th, capped) = complex_euclidean_radius(t);
        states.push(rotated_top(t, th).1);
        (r, capped)
    } else {
        (sup_re.abs().max(inf_re.abs()), false)
    };
    let samples: Vec<Complex64> = states
        .iter()
        .map(|x| pairing(x, &mat_vec(t, x)).to_complex())
        .collect();
    let discs = samples
        .iter()
        .map(|&center| Disc {
            center,
            radius: 0.0,
        })
        .collect();
    RangeSummary {
        radius,
        sup_re,
        inf_re,
        samples,
        discs,
        exact: true,
        reduced_accuracy,
    }
}

/// `v(T)` straight from a geometry, skipping the sample bookkeeping.
pub(crate) fn geometry_radius<S: Scalar>(
    g: &crate::spaces::Geometry,
    t: &DMatrix<S>,
    budget: usize,
) -> Result<(f64, bool)> {
    if g.is_hilbert() {
        if S::IS_COMPLEX {
            return Ok((complex_euclidean_radius(t).0, true));
        }
        let (vals, _) = hermitian_eigen(&hermitian_part(t));
        return Ok((vals[0].abs().max(vals[vals.len() - 1].abs()), true));
    }
    let (discs, exact) = g.range_discs(t, budget, &[])?;
    Ok((stats_from_discs(&discs).0, exact))
}

/// `V(T)` statistics over the duality pairs of `space`; exact on
/// polyhedral spaces (extreme pairs) and on Euclidean spaces (spectral
/// formulas), sampled otherwise.
pub fn range_summary<S: Scalar>(space: &NormedSpace, t: &Operator<S>, budget: usize) -> Result<RangeSummary> {
    range_summary_with(space, t, budget, &[])
}

/// As [`range_summary`], adding states built from `extra` vectors on
/// smooth summands.
pub fn range_summary_with<S: Scalar>(
    space: &NormedSpace,
    t: &Operator<S>,
    budget: usize,
    extra: &[Vec<S>],
) -> Result<RangeSummary> {
    t.require_square()?;
    if t.domain() != space {
        return Err(crate::error::precondition("operator does not act on this space"));
    }
    if space.geometry().is_hilbert() {
        return Ok(euclidean_summary(t.matrix(), budget));
    }
    let (discs, exact) = space.geometry().range_discs(t.matrix(), budget, extra)?;
    let (radius, sup_re, inf_re) = stats_from_discs(&discs);
    Ok(RangeSummary {
        radius,
        sup_re,
        inf_re,
        samples: disc_samples::<S>(&discs),
        discs,
        exact,
        reduced_accuracy: false,
    })
}

/// `v(T)` with exactness.
pub fn numerical_radius<S: Scalar>(t: &Operator<S>, budget: usize) -> Result<Estimate> {
    let r = range_summary(t.domain(), t, budget)?;
    Ok(Estimate {
        value: r.radius,
        exact: r.exact,
    })
}

/// The three sides of the exponential formula.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpFormula {
    /// `sup Re V(T)`.
    pub lhs: f64,
    /// Extrapolated `lim_{β↓0} (‖I+βT‖−1)/β`.
    pub mid: f64,
    /// `sup_{α>0} log‖exp(αT)‖/α`.
    pub rhs: f64,
    /// `(β, (‖I+βT‖−1)/β)` for `β = 2^{-j}`, `j = 10..=30`.
    pub raw: Vec<(f64, f64)>,
    /// Largest value of `log‖exp(αT)‖/α` on the logarithmic α grid alone.
    pub rhs_grid_max: f64,
}

/// Richardson order-2 extrapolation of a sequence sampled at halving steps;
/// returns the extrapolant with the smallest successive difference.
fn richardson(values: &[f64]) -> f64 {
    if values.len() < 3 {
        return *values.last().unwrap_or(&f64::NAN);
    }
    let r1: Vec<f64> = values.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let r2: Vec<f64> = r1.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
    let mut best = (f64::INFINITY, r2[0]);
    for w in r2.windows(2) {
        let d = (w[1] - w[0]).abs();
        if d < best.0 {
            best = (d, w[1]);
        }
    }
    best.1
}

/// Points of the logarithmic α grid on `[1e-3, 1e2]`.
pub const ALPHA_GRID_POINTS: usize = 201;

/// Evaluates the exponential formula; needs exact operator norms.
pub fn exp_formula<S: Scalar>(space: &NormedSpace, t: &Operator<S>) -> Result<ExpFormula> {
    let summary = range_summary(space, t, DEFAULT_BUDGET)?;
    if !op_norm(t).exact || !summary.exact {
        return Err(capability("the exponential formula needs exact operator norms"));
    }
    let n = t.matrix().nrows();
    let id = DMatrix::<S>::identity(n, n);
    let norm_of = |m: DMatrix<S>| op_norm_with(&t.with_matrix(m).expect("same shape"), DEFAULT_BUDGET).value;
    let raw: Vec<(f64, f64)> = (10..=30)
        .map(|j| {
            let beta = libm::ldexp(1.0, -j);
            let m = &id + t.matrix() * S::from_real(beta);
            (beta, (norm_of(m) - 1.0) / beta)
        })
        .collect();
    let mid = richardson(&raw.iter().map(|r| r.1).collect::<Vec<_>>());
    let g = |alpha: f64| -> f64 {
        let e = expm(t, alpha).expect("square operator");
        libm::log1p(norm_of(e.matrix) - 1.0) / alpha
    };
    let mut rhs_grid_max = f64::NEG_INFINITY;
    for k in 0..ALPHA_GRID_POINTS {
        let alpha = libm::pow(10.0, -3.0 + 5.0 * k as f64 / (ALPHA_GRID_POINTS - 1) as f64);
        rhs_grid_max = rhs_grid_max.max(g(alpha));
    }
    let small: Vec<f64> = (10..=24).map(|j| g(libm::ldexp(1.0, -j))).collect();
    let rhs = rhs_grid_max.max(richardson(&small));
    Ok(ExpFormula {
        lhs: summary.sup_re,
        mid,
        rhs,
        raw,
        rhs_grid_max,
    })
}

/// Outcome of [`check_daugavet`].
#[derive(Clone, Debug, PartialEq)]
pub struct DaugavetReport {
    /// `|‖I+T‖ − (1+‖T‖)| ≤ tol`.
    pub holds: bool,
    /// `‖I+T‖`.
    pub lhs: f64,
    /// `1 + ‖T‖`.
    pub rhs: f64,
    /// `|sup Re V(T) − ‖T‖| ≤ tol`.
    pub range_criterion: bool,
    pub sup_re: f64,
    pub norm: f64,
    /// `T = 0`, where the equation holds trivially.
    pub degenerate: bool,
    pub exact: bool,
}

impl DaugavetReport {
    pub fn consistent(&self) -> bool {
        self.holds == self.range_criterion
    }
}

/// Checks `‖I+T‖ = 1+‖T‖` and the equivalent `sup Re V(T) = ‖T‖`.
pub fn check_daugavet<S: Scalar>(space: &NormedSpace, t: &Operator<S>, tol: f64) -> Result<DaugavetReport> {
    let summary = range_summary(space, t, DEFAULT_BUDGET)?;
    let norm = op_norm(t);
    let n = t.matrix().nrows();
    let shifted = t.with_matrix(DMatrix::<S>::identity(n, n) + t.matrix())?;
    let lhs = op_norm(&shifted);
    let rhs = 1.0 + norm.value;
    Ok(DaugavetReport {
        holds: (lhs.value - rhs).abs() <= tol,
        lhs: lhs.value,
        rhs,
        range_criterion: (summary.sup_re - norm.value).abs() <= tol,
        sup_re: summary.sup_re,
        norm: norm.value,
        degenerate: norm.value == 0.0,
        exact: summary.exact && norm.exact && lhs.exact,
    })
}

/// One `λ` of [`daugavet_circle_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct CircleInstance {
    pub lambda: Complex64,
    /// Whether `λT` satisfies the Daugavet equation.
    pub equation_holds: bool,
    /// Largest separation `Re(conj(u)·p) − h(u)` of `p = conj(λ)‖T‖` from the
    /// hull of `V(T)` over the direction grid; `None` when not checked.
    pub separation: Option<f64>,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircleReport {
    pub norm: f64,
    pub instances: Vec<CircleInstance>,
    pub violations: usize,
    pub exact: bool,
}

/// Directions used for support-function comparisons.
pub const SUPPORT_DIRECTIONS: usize = 360;

/// `max_u (Re(conj(u)·p) − h(u))` over unit directions `u`; non-positive
/// (up to tolerance) when `p` lies in the closed convex hull.
pub fn hull_separation(summary: &RangeSummary, p: Complex64, complex: bool) -> f64 {
    let dirs: Vec<Complex64> = if complex {
        (0..SUPPORT_DIRECTIONS)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / SUPPORT_DIRECTIONS as f64))
            .collect()
    } else {
        vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
    };
    dirs.iter()
        .map(|u| (u.conj() * p).re - summary.support(*u))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// For each `λ` with `λT` satisfying the Daugavet equation, verifies that
/// `‖T‖` lies in `λ·conv V(T)`.
pub fn daugavet_circle_check<S: Scalar>(
    space: &NormedSpace,
    t: &Operator<S>,
    lambdas: &[S],
    tol: f64,
) -> Result<CircleReport> {
    let summary = range_summary(space, t, DEFAULT_BUDGET)?;
    let norm = op_norm(t);
    let mut exact = summary.exact && norm.exact;
    let mut instances = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let rep = check_daugavet(space, &t.scaled(lambda), tol)?;
        exact &= rep.exact;
        let l = lambda.to_complex();
        let (separation, violated) = if rep.holds {
            let p = l.conj() * norm.value;
            let s = hull_separation(&summary, p, S::IS_COMPLEX);
            (Some(s), s > tol)
        } else {
            (None, false)
        };
        instances.push(CircleInstance {
            lambda: l,
            equation_holds: rep.holds,
            separation,
            violated,
        });
    }
    let violations = instances.iter().filter(|i| i.violated).count();
    Ok(CircleReport {
        norm: norm.value,
        instances,
        violations,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Field;

    fn j() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
    }

    fn sp(p: f64, n: usize) -> NormedSpace {
        NormedSpace::lp(Field::Real, p, n).unwrap()
    }

    #[test]
    fn rotation_on_plane_and_square() {
        let l2 = sp(2.0, 2);
        let r = range_summary(&l2, &Operator::on(&l2, j()).unwrap(), 16).unwrap();
        assert!(r.radius.abs() < 1e-15 && r.sup_re.abs() < 1e-15 && r.exact);
        let linf = sp(f64::INFINITY, 2);
        let r = range_summary(&linf, &Operator::on(&linf, j()).unwrap(), 16).unwrap();
        assert_eq!(r.radius, 1.0);
        assert!(r.exact);
    }

    #[test]
    fn identity_range_is_one() {
        for s in [sp(1.0, 3), sp(f64::INFINITY, 2), sp(2.0, 3)] {
            let r = range_summary(&s, &Operator::<f64>::identity(&s).unwrap(), 8).unwrap();
            assert!(r.samples.iter().all(|z| (z - 1.0).norm() < 1e-12));
            assert!((r.radius - 1.0).abs() < 1e-12 && (r.sup_re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_nilpotent_radius_is_half() {
        let s = NormedSpace::lp(Field::Complex, 2.0, 2).unwrap();
        let n = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let r = range_summary(&s, &Operator::on(&s, n).unwrap(), 8).unwrap();
        assert!((r.radius - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exponential_formula_examples() {
        let l2 = sp(2.0, 2);
        let e = exp_formula(&l2, &Operator::on(&l2, j()).unwrap()).unwrap();
        assert!(e.lhs.abs() < 1e-12 && e.mid.abs() < 1e-6 && e.rhs.abs() < 1e-6, "{e:?}");
        let l1 = sp(1.0, 2);
        let e = exp_formula(&l1, &Operator::<f64>::identity(&l1).unwrap()).unwrap();
        for v in [e.lhs, e.mid, e.rhs] {
            assert!((v - 1.0).abs() < 1e-6, "{e:?}");
        }
    }

    #[test]
    fn daugavet_examples() {
        let l2 = sp(2.0, 2);
        let r = check_daugavet(&l2, &Operator::on(&l2, j()).unwrap(), 1e-9).unwrap();
        assert!(!r.holds && !r.range_criterion);
        assert!((r.lhs - core::f64::consts::SQRT_2).abs() < 1e-12);
        let linf = sp(f64::INFINITY, 2);
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let r = check_daugavet(&linf, &Operator::on(&linf, d).unwrap(), 1e-9).unwrap();
        assert!(r.holds && r.range_criterion);
        let z = check_daugavet(&linf, &Operator::<f64>::zero(&linf).unwrap(), 1e-9).unwrap();
        assert!(z.holds && z.degenerate);
    }

    #[test]
    fn circle_check_on_negative_projection() {
        let linf = sp(f64::INFINITY, 2);
        let d = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]);
        let rep = daugavet_circle_check(&linf, &Operator::on(&linf, d).unwrap(), &[1.0, -1.0], 1e-9).unwrap();
        assert!(rep.instances[1].equation_holds);
        assert_eq!(rep.violations, 0);
    }
}
