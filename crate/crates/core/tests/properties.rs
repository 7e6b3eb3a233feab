use std::f64::consts::PI;

use nalgebra::DMatrix;
use normlab_core::cantor::{
    affine_extension, build_XE, cantor_grid, e_basis_for, gap_functional_norms, quotient_isometry_check,
    urysohn_bump, EKind,
};
use normlab_core::index::numerical_index_estimate;
use normlab_core::lie::{default_rho_grid, is_skew_hermitian, lie_algebra_basis, semigroup_verify, Verdict};
use normlab_core::numrange::range_summary;
use normlab_core::structure::{extend_by_zero, l1_sum, linf_sum};
use normlab_core::{
    adjoint, dual_norm, dual_space, duality_pairs, expm, extreme_points, norm, op_norm, Field, NormedSpace, Operator,
};
use proptest::prelude::*;

fn real(p: f64, n: usize) -> NormedSpace {
    NormedSpace::lp(Field::Real, p, n).unwrap()
}

fn polygon(radii: &[f64], phase: f64) -> NormedSpace {
    let n = radii.len();
    let v = radii
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let t = phase + PI * k as f64 / n as f64;
            vec![r * t.cos(), r * t.sin()]
        })
        .collect();
    NormedSpace::polyhedral(v).unwrap()
}

fn exact_space(which: usize, radii: &[f64], phase: f64) -> NormedSpace {
    match which % 4 {
        0 => real(1.0, 2),
        1 => real(f64::INFINITY, 3),
        2 => real(2.0, 2),
        _ => polygon(radii, phase),
    }
}

fn square(d: usize, entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |r, c| entries[r * d + c])
}

fn close_sets(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    let within = |p: &Vec<f64>, q: &Vec<f64>| {
        let plus = p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol);
        let minus = p.iter().zip(q).all(|(x, y)| (x + y).abs() <= tol);
        plus || minus
    };
    a.iter().all(|p| b.iter().any(|q| within(p, q))) && b.iter().all(|q| a.iter().any(|p| within(p, q)))
}

fn radii() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..1.5, 3..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polyhedral_norm_is_max_over_dual_extremes(r in radii(), phase in 0.0f64..PI, x in prop::array::uniform2(-3.0f64..3.0)) {
        let space = polygon(&r, phase);
        let ext = extreme_points(&dual_space(&space).unwrap()).unwrap();
        let expect = ext.iter().map(|f| (f[0] * x[0] + f[1] * x[1]).abs()).fold(0.0, f64::max);
        prop_assert!((norm(&space, &x[..]).unwrap() - expect).abs() <= 1e-9);
    }

    #[test]
    fn duality_pairs_are_norming(which in 0usize..4, r in radii(), phase in 0.0f64..PI) {
        let space = exact_space(which, &r, phase);
        let pairs = duality_pairs::<f64>(&space, 32).unwrap();
        for p in &pairs.pairs {
            prop_assert!(p.defect(&space).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn double_dual_recovers_polygon(r in radii(), phase in 0.0f64..PI) {
        let space = polygon(&r, phase);
        let back = dual_space(&dual_space(&space).unwrap()).unwrap();
        prop_assert!(close_sets(&extreme_points(&space).unwrap(), &extreme_points(&back).unwrap(), 1e-9));
    }

    #[test]
    fn sum_norms_combine_parts(x in prop::collection::vec(-2.0f64..2.0, 5)) {
        let a = real(2.0, 2);
        let b = real(f64::INFINITY, 3);
        let na = norm(&a, &x[..2]).unwrap();
        let nb = norm(&b, &x[2..]).unwrap();
        let s1 = l1_sum(vec![a.clone(), b.clone()]).unwrap();
        let si = linf_sum(vec![a, b]).unwrap();
        prop_assert!((norm(&s1, &x).unwrap() - (na + nb)).abs() <= 1e-12);
        prop_assert!((norm(&si, &x).unwrap() - na.max(nb)).abs() <= 1e-12);
    }

    #[test]
    fn exponential_is_a_group(e in prop::collection::vec(-1.0f64..1.0, 9), size in 0.0f64..5.0,
                              s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let space = real(2.0, 3);
        let mut m = square(3, &e);
        let n = normlab_core::linalg::spectral_norm(&m);
        if n > 0.0 {
            m *= size / n;
        }
        let op = Operator::on(&space, m).unwrap();
        let lhs = expm(&op, s + t).unwrap().matrix;
        let es = expm(&op, s).unwrap().matrix;
        let et = expm(&op, t).unwrap().matrix;
        // the product cancels down from the size of its factors
        let scale = (3.0 * es.amax() * et.amax()).max(lhs.amax()).max(1.0);
        let rhs = es * et;
        prop_assert!((lhs - rhs).amax() <= 1e-10 * scale);
    }

    #[test]
    fn operator_norm_is_submultiplicative(which in 0usize..4, r in radii(), phase in 0.0f64..PI,
                                          a in prop::collection::vec(-1.0f64..1.0, 9),
                                          b in prop::collection::vec(-1.0f64..1.0, 9)) {
        let space = exact_space(which, &r, phase);
        let d = space.dim();
        let s = Operator::on(&space, square(d, &a)).unwrap();
        let t = Operator::on(&space, square(d, &b)).unwrap();
        let st = s.compose(&t).unwrap();
        prop_assert!(op_norm(&st).value <= op_norm(&s).value * op_norm(&t).value + 1e-9);
    }

    #[test]
    fn operator_norm_is_homogeneous(which in 0usize..4, r in radii(), phase in 0.0f64..PI,
                                    a in prop::collection::vec(-1.0f64..1.0, 9), lambda in -4.0f64..4.0) {
        let space = exact_space(which, &r, phase);
        let t = Operator::on(&space, square(space.dim(), &a)).unwrap();
        let n = op_norm(&t).value;
        let scaled = op_norm(&t.scaled(lambda)).value;
        prop_assert!((scaled - lambda.abs() * n).abs() <= 1e-12 * n.max(1.0) * lambda.abs().max(1.0));
    }

    #[test]
    fn radius_is_below_norm_and_adjoint_invariant(which in 0usize..4, r in radii(), phase in 0.0f64..PI,
                                                  a in prop::collection::vec(-1.0f64..1.0, 9)) {
        let space = exact_space(which, &r, phase);
        let t = Operator::on(&space, square(space.dim(), &a)).unwrap();
        let v = range_summary(&space, &t, 64).unwrap().radius;
        prop_assert!(v <= op_norm(&t).value + 1e-9);
        let ts = adjoint(&t).unwrap();
        let vs = range_summary(ts.domain(), &ts, 64).unwrap().radius;
        prop_assert!((v - vs).abs() <= 1e-9);
    }

    #[test]
    fn zero_extension_keeps_the_range(a in prop::collection::vec(-1.0f64..1.0, 4), zdim in 1usize..3) {
        let x = real(2.0, 2);
        let s = Operator::on(&x, square(2, &a)).unwrap();
        let ext = extend_by_zero(&s, &real(1.0, zdim)).unwrap();
        let vs = range_summary(&x, &s, 64).unwrap();
        let vt = range_summary(ext.operator.domain(), &ext.operator, 64).unwrap();
        prop_assert!(vt.radius <= vs.radius.max(0.0) + 1e-9);
        prop_assert!(vt.sup_re <= vs.sup_re.max(0.0) + 1e-9);
        prop_assert!(vt.inf_re >= vs.inf_re.min(0.0) - 1e-9);
    }

    #[test]
    fn index_witness_attains_the_bound(which in 0usize..4, r in radii(), phase in 0.0f64..PI, seed in 0u64..1000) {
        let space = exact_space(which, &r, phase);
        let rep = numerical_index_estimate::<f64>(&space, 8, seed).unwrap();
        let w = &rep.witness;
        let wn = op_norm(w).value;
        prop_assert!((wn - 1.0).abs() <= 1e-9);
        let v = range_summary(&space, w, 64).unwrap().radius;
        prop_assert!((v / wn - rep.upper).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn certified_index_bounds_every_operator(r in radii(), phase in 0.0f64..PI,
                                             a in prop::collection::vec(-1.0f64..1.0, 4)) {
        let space = polygon(&r, phase);
        let rep = numerical_index_estimate::<f64>(&space, 8, 0).unwrap();
        prop_assume!(rep.exact);
        let t = Operator::on(&space, square(2, &a)).unwrap();
        let v = range_summary(&space, &t, 64).unwrap().radius;
        prop_assert!(rep.estimate * op_norm(&t).value <= v + 5e-3);
    }

    #[test]
    fn index_ratio_is_scale_invariant(a in prop::collection::vec(-1.0f64..1.0, 4), lambda in 0.1f64..10.0) {
        let space = real(1.0, 2);
        let t = Operator::on(&space, square(2, &a)).unwrap();
        let n = op_norm(&t).value;
        prop_assume!(n > 1e-3);
        let ratio = |op: &Operator<f64>| range_summary(&space, op, 64).unwrap().radius / op_norm(op).value;
        prop_assert!((ratio(&t) - ratio(&t.scaled(lambda))).abs() <= 1e-9);
    }

    #[test]
    fn lie_basis_generates_isometries(which in 0usize..3) {
        let space = match which {
            0 => real(2.0, 3),
            1 => l1_sum(vec![real(2.0, 2), real(1.0, 1)]).unwrap(),
            _ => linf_sum(vec![real(2.0, 2), real(2.0, 2)]).unwrap(),
        };
        let rep = lie_algebra_basis::<f64>(&space, 1e-9).unwrap();
        for b in &rep.basis {
            let drift = semigroup_verify(&space, b, &default_rho_grid(), 1e-9).unwrap().max_drift;
            prop_assert!(drift <= 1e-9);
            let bs = adjoint(b).unwrap();
            let v = range_summary(bs.domain(), &bs, 64).unwrap().radius;
            prop_assert!(v <= 1e-9);
        }
    }

    #[test]
    fn non_skew_operators_drift(a in prop::collection::vec(-1.0f64..1.0, 4)) {
        let space = real(1.0, 2);
        let t = Operator::on(&space, square(2, &a)).unwrap();
        let v = range_summary(&space, &t, 64).unwrap().radius;
        prop_assume!(v > 0.1);
        prop_assert_eq!(is_skew_hermitian(&space, &t, 1e-9).unwrap(), Verdict::No);
        let drift = semigroup_verify(&space, &t, &default_rho_grid(), 1e-9).unwrap().max_drift;
        prop_assert!(drift > 0.0);
    }

    #[test]
    fn positive_index_forces_trivial_algebra(r in radii(), phase in 0.0f64..PI) {
        let space = polygon(&r, phase);
        let rep = numerical_index_estimate::<f64>(&space, 8, 0).unwrap();
        prop_assume!(rep.exact && rep.estimate > 1e-6);
        prop_assert_eq!(lie_algebra_basis::<f64>(&space, 1e-9).unwrap().dimension, 0);
    }

    #[test]
    fn bumps_are_valid(m_exp in 3u32..6, lo in 0.0f64..0.9, width in 0.05f64..0.5, constants in any::<bool>()) {
        let m = 3u64.pow(m_exp);
        let hi = (lo + width).min(1.0);
        let grid = cantor_grid(1, m).unwrap();
        let kind = if constants { EKind::Constants } else { EKind::L2Plane };
        let (basis, _) = e_basis_for(kind, &grid).unwrap();
        let xe = build_XE(&grid, &basis).unwrap();
        if let Ok(b) = urysohn_bump(&xe, (lo, hi)) {
            prop_assert_eq!(b.values.iter().cloned().fold(0.0, f64::max), 1.0);
            for (i, &t) in grid.nodes.iter().enumerate() {
                prop_assert!(b.values[i] >= 0.0);
                if !(lo < t && t < hi) {
                    prop_assert_eq!(b.values[i], 0.0);
                }
                if grid.cantor_nodes.contains(&i) {
                    prop_assert_eq!(b.values[i], 0.0);
                }
            }
            prop_assert_eq!(xe.values(&b.coords), b.values);
        }
    }

    #[test]
    fn quotient_map_is_two_sided(m_exp in 3u32..5, a in prop::collection::vec(-1.0f64..1.0, 2)) {
        let grid = cantor_grid(1, 3u64.pow(m_exp)).unwrap();
        let (basis, _) = e_basis_for(EKind::L2Plane, &grid).unwrap();
        let xe = build_XE(&grid, &basis).unwrap();
        let rep = quotient_isometry_check(&xe, &[a.clone()], 1e-9).unwrap();
        prop_assert!(rep.holds);
        let f = affine_extension(&xe, &a);
        prop_assert_eq!(xe.restrict(&f), xe.e_values(&a));
        prop_assert!((norm(&xe.space, &f).unwrap() - xe.e_norm(&a)).abs() <= 1e-9);
    }

    #[test]
    fn gap_subspace_sits_inside(m_exp in 3u32..5, seed in prop::collection::vec(-1.0f64..1.0, 64)) {
        let grid = cantor_grid(1, 3u64.pow(m_exp)).unwrap();
        let (basis, _) = e_basis_for(EKind::Constants, &grid).unwrap();
        let xe = build_XE(&grid, &basis).unwrap();
        let g = grid.gap_nodes.len();
        let mut coords = vec![0.0; xe.dim()];
        for j in 0..g {
            coords[xe.e_dim + j] = seed[j % seed.len()];
        }
        let vals = xe.values(&coords);
        for &i in &grid.cantor_nodes {
            prop_assert_eq!(vals[i], 0.0);
        }
        let sup = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!((norm(&xe.space, &coords).unwrap() - sup).abs() <= 1e-12);
    }

    #[test]
    fn dual_dimension_and_gap_norms(m_exp in 3u32..5, constants in any::<bool>()) {
        let grid = cantor_grid(1, 3u64.pow(m_exp)).unwrap();
        let kind = if constants { EKind::Constants } else { EKind::L2Plane };
        let (basis, _) = e_basis_for(kind, &grid).unwrap();
        let xe = build_XE(&grid, &basis).unwrap();
        prop_assert_eq!(dual_space(&xe.space).unwrap().dim(), xe.dim());
        let rep = gap_functional_norms(&xe, 1e-9).unwrap();
        for f in &rep.functionals {
            prop_assert!((f.norm - 1.0).abs() <= 1e-9);
        }
        let phi = vec![1.0; xe.dim()];
        prop_assert!(dual_norm(&xe.space, &phi).unwrap() > 0.0);
    }
}
