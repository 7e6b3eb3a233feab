use std::f64::consts::PI;

use normlab_core::cantor::{
    build_XE, cantor_grid, e_basis_for, main_example_experiment, quotient_isometry_check, urysohn_bump, EKind,
    PlSpace,
};
use normlab_core::index::{numerical_index_estimate, verify_dual_inequality};
use normlab_core::lie::{
    default_rho_grid, dissipativity, is_hermitian, is_skew_hermitian, lie_algebra_basis, semigroup_verify,
};
use normlab_core::numrange::{check_daugavet, daugavet_circle_check, exp_formula, range_summary};
use normlab_core::structure::{extend_by_zero, extend_isometry, l1_sum, linf_sum, Extension};
use normlab_core::{
    dual_space, duality_pairs, extreme_points, op_norm, Complex64, Error, NormedSpace, Operator, Scalar,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cli::{CantorCmd, EArg, ExtendMode, Global, Group, IndexCmd, LieCmd, NrCmd, SpaceCmd, SumCmd, SumKindArg};
use crate::error::CliError;
use crate::format::{
    complex, matrix, num, operator_from_value, operator_to_value, provenance, read_json, space_from_value,
    space_to_value, vector, AnyOperator,
};
use crate::output::{Output, Table};

/// Largest allowed gap between the three sides of the exponential formula.
pub const EXP_FORMULA_AGREEMENT: f64 = 1e-6;

struct Ctx<'a> {
    g: &'a Global,
}

impl Ctx<'_> {
    fn space(&self) -> Result<NormedSpace, CliError> {
        let p = self
            .g
            .space
            .as_deref()
            .ok_or_else(|| CliError::Usage("this command needs --space".into()))?;
        space_from_value(&read_json(p)?)
    }

    fn operator(&self) -> Result<(NormedSpace, AnyOperator), CliError> {
        let fallback = match &self.g.space {
            Some(_) => Some(self.space()?),
            None => None,
        };
        let p = self
            .g
            .op
            .as_deref()
            .ok_or_else(|| CliError::Usage("this command needs --op".into()))?;
        let t = operator_from_value(&read_json(p)?, fallback.as_ref())?;
        let space = match &t {
            AnyOperator::Real(t) => t.domain().clone(),
            AnyOperator::Complex(t) => t.domain().clone(),
        };
        if let Some(s) = &fallback {
            if s != &space {
                return Err(CliError::Input("operator space differs from --space".into()));
            }
        }
        Ok((space, t))
    }

    fn tol(&self, space: &NormedSpace) -> f64 {
        self.g.tol.unwrap_or(if space.is_sampled() { 1e-6 } else { 1e-9 })
    }
}

macro_rules! with_op {
    ($op:expr, $t:ident => $body:expr) => {
        match $op {
            AnyOperator::Real($t) => $body,
            AnyOperator::Complex($t) => $body,
        }
    };
}

pub fn execute(group: &Group, g: &Global) -> Result<Output, CliError> {
    let ctx = Ctx { g };
    match group {
        Group::Space { cmd } => space_cmd(&ctx, cmd),
        Group::Nr { cmd } => {
            let (space, op) = ctx.operator()?;
            let tol = ctx.tol(&space);
            with_op!(&op, t => nr_cmd(cmd, &space, t, tol, g.budget))
        }
        Group::Lie { cmd } => lie_cmd(&ctx, cmd),
        Group::Index { cmd } => index_cmd(&ctx, cmd),
        Group::Sum { cmd } => sum_cmd(&ctx, cmd),
        Group::Cantor { cmd } => cantor_cmd(&ctx, cmd),
    }
}

fn estimate(value: f64, exact: bool) -> Value {
    json!({"value": num(value), "provenance": provenance(exact)})
}

fn space_cmd(ctx: &Ctx, cmd: &SpaceCmd) -> Result<Output, CliError> {
    let s = ctx.space()?;
    match cmd {
        SpaceCmd::Dual => {
            let d = dual_space(&s)?;
            Ok(Output::new(json!({
                "dim": d.dim(),
                "space": space_to_value(&d),
                "provenance": provenance(true),
            })))
        }
        SpaceCmd::Extremes => {
            let pts = extreme_points(&s)?;
            let mut headers: Vec<String> = (0..s.dim()).map(|i| format!("x{i}")).collect();
            if headers.is_empty() {
                headers.push("x0".into());
            }
            let mut table = Table {
                headers,
                rows: Vec::new(),
            };
            for p in &pts {
                table.push(p.iter().map(|v| v.to_string()).collect());
            }
            Ok(Output::new(json!({
                "count": pts.len(),
                "points": pts,
                "provenance": provenance(true),
            }))
            .with_table(table))
        }
        SpaceCmd::Pairs => {
            if s.is_complex() {
                pairs_report::<Complex64>(&s, ctx.g.budget)
            } else {
                pairs_report::<f64>(&s, ctx.g.budget)
            }
        }
    }
}

fn pairs_report<S: Scalar>(s: &NormedSpace, budget: usize) -> Result<Output, CliError> {
    let set = duality_pairs::<S>(s, budget)?;
    let mut pairs = Vec::with_capacity(set.pairs.len());
    for p in &set.pairs {
        pairs.push(json!({"x": vector(&p.x), "xstar": vector(&p.xstar), "defect": num(p.defect(s)?)}));
    }
    Ok(Output::new(json!({
        "count": pairs.len(),
        "pairs": pairs,
        "provenance": provenance(set.exact),
    })))
}

fn circle_lambdas<S: Scalar>() -> Vec<S> {
    if S::IS_COMPLEX {
        (0..8)
            .map(|k| {
                let a = PI * k as f64 / 4.0;
                S::from_parts(a.cos(), a.sin())
            })
            .collect()
    } else {
        vec![S::one(), -S::one()]
    }
}

fn nr_cmd<S: Scalar>(
    cmd: &NrCmd,
    space: &NormedSpace,
    t: &Operator<S>,
    tol: f64,
    budget: usize,
) -> Result<Output, CliError> {
    match cmd {
        NrCmd::Summary => {
            let r = range_summary(space, t, budget)?;
            let n = op_norm(t);
            let mut table = Table::new(&["re", "im"]);
            for z in &r.samples {
                table.push(vec![z.re.to_string(), z.im.to_string()]);
            }
            let samples: Vec<Value> = r.samples.iter().map(|z| complex(*z)).collect();
            Ok(Output::new(json!({
                "range": {
                    "radius": num(r.radius),
                    "sup_re": num(r.sup_re),
                    "inf_re": num(r.inf_re),
                    "samples": samples,
                    "reduced_accuracy": r.reduced_accuracy,
                    "provenance": provenance(r.exact),
                },
                "norm": estimate(n.value, n.exact),
            }))
            .with_table(table))
        }
        NrCmd::Expformula => {
            let f = exp_formula(space, t)?;
            let gap = (f.lhs - f.mid).abs().max((f.lhs - f.rhs).abs());
            let agree = gap <= EXP_FORMULA_AGREEMENT;
            Ok(Output::new(json!({
                "lhs": num(f.lhs),
                "mid": num(f.mid),
                "rhs": num(f.rhs),
                "rhs_grid_max": num(f.rhs_grid_max),
                "max_gap": num(gap),
                "agree": agree,
                "provenance": provenance(true),
            }))
            .fail_if(!agree, format!("exponential formula sides differ by {gap:e}")))
        }
        NrCmd::Daugavet => {
            let r = check_daugavet(space, t, tol)?;
            let c = daugavet_circle_check(space, t, &circle_lambdas::<S>(), tol)?;
            let instances: Vec<Value> = c
                .instances
                .iter()
                .map(|i| {
                    json!({
                        "lambda": complex(i.lambda),
                        "equation_holds": i.equation_holds,
                        "separation": i.separation.map(num),
                        "violated": i.violated,
                    })
                })
                .collect();
            let consistent = r.consistent();
            Ok(Output::new(json!({
                "holds": r.holds,
                "range_criterion": r.range_criterion,
                "consistent": consistent,
                "degenerate": r.degenerate,
                "norm_identity_lhs": num(r.lhs),
                "norm_identity_rhs": num(r.rhs),
                "sup_re": num(r.sup_re),
                "norm": num(r.norm),
                "tol": num(tol),
                "circle": {
                    "instances": instances,
                    "violations": c.violations,
                    "provenance": provenance(c.exact),
                },
                "provenance": provenance(r.exact),
            }))
            .fail_if(
                !consistent || c.violations > 0,
                "Daugavet equation and range criterion disagree",
            ))
        }
    }
}

fn lie_cmd(ctx: &Ctx, cmd: &LieCmd) -> Result<Output, CliError> {
    match cmd {
        LieCmd::Basis => {
            let s = ctx.space()?;
            let tol = ctx.tol(&s);
            if s.is_complex() {
                lie_basis::<Complex64>(&s, tol)
            } else {
                lie_basis::<f64>(&s, tol)
            }
        }
        LieCmd::Verify => {
            let (s, op) = ctx.operator()?;
            let tol = ctx.tol(&s);
            with_op!(&op, t => {
                let r = semigroup_verify(&s, t, &default_rho_grid(), tol)?;
                Ok(Output::new(json!({
                    "max_drift": num(r.max_drift),
                    "worst_rho": num(r.worst_rho),
                    "isometric": r.isometric,
                    "reduced_accuracy": r.reduced_accuracy,
                    "tol": num(tol),
                    "provenance": provenance(r.exact),
                })))
            })
        }
        LieCmd::Classify => {
            let (s, op) = ctx.operator()?;
            let tol = ctx.tol(&s);
            with_op!(&op, t => classify(&s, t, tol))
        }
    }
}

fn lie_basis<S: Scalar>(s: &NormedSpace, tol: f64) -> Result<Output, CliError> {
    let r = lie_algebra_basis::<S>(s, tol)?;
    let basis: Vec<Value> = r.basis.iter().map(|b| matrix(b.matrix())).collect();
    let residuals: Vec<Value> = r.residuals.iter().map(|x| num(*x)).collect();
    Ok(Output::new(json!({
        "dimension": r.dimension,
        "basis": basis,
        "residuals": residuals,
        "provenance": provenance(r.exact),
    })))
}

fn optional<T>(r: Result<T, Error>) -> Result<Option<T>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Capability(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn classify<S: Scalar>(s: &NormedSpace, t: &Operator<S>, tol: f64) -> Result<Output, CliError> {
    let skew = is_skew_hermitian(s, t, tol)?;
    let diss = optional(dissipativity(s, t, tol))?;
    let herm = optional(is_hermitian(s, t, tol))?;
    let consistent = diss.as_ref().is_none_or(|d| d.consistent);
    let diss_json = diss.as_ref().map(|d| {
        json!({
            "dissipative": d.dissipative,
            "sup_re": num(d.sup_re),
            "max_semigroup_norm": num(d.max_semigroup_norm),
            "consistent": d.consistent,
            "provenance": provenance(true),
        })
    });
    Ok(Output::new(json!({
        "skew_hermitian": skew.name(),
        "dissipativity": diss_json,
        "hermitian": herm,
        "tol": num(tol),
        "provenance": provenance(s.is_exact() || s.is_hilbert()),
    }))
    .fail_if(!consistent, "range and semigroup answers on dissipativity disagree"))
}

fn index_cmd(ctx: &Ctx, cmd: &IndexCmd) -> Result<Output, CliError> {
    let s = ctx.space()?;
    match cmd {
        IndexCmd::Estimate => {
            if s.is_complex() {
                index_estimate::<Complex64>(&s, ctx.g.budget, ctx.g.seed)
            } else {
                index_estimate::<f64>(&s, ctx.g.budget, ctx.g.seed)
            }
        }
        IndexCmd::Dualcheck { trials } => {
            let r = verify_dual_inequality(&s, *trials, ctx.g.seed)?;
            let ok = r.violations == 0 && r.inequality_holds;
            Ok(Output::new(json!({
                "trials": r.trials,
                "checked": r.checked,
                "violations": r.violations,
                "max_discrepancy": num(r.max_discrepancy),
                "primal_estimate": num(r.primal_estimate),
                "dual_estimate": num(r.dual_estimate),
                "inequality_holds": r.inequality_holds,
                "provenance": provenance(false),
            }))
            .fail_if(!ok, "dual radius identity or index inequality failed"))
        }
    }
}

fn index_estimate<S: Scalar>(s: &NormedSpace, budget: usize, seed: u64) -> Result<Output, CliError> {
    let r = numerical_index_estimate::<S>(s, budget, seed)?;
    Ok(Output::new(json!({
        "upper": num(r.upper),
        "estimate": num(r.estimate),
        "witness": matrix(r.witness.matrix()),
        "trace_len": r.trace_len,
        "evaluations": r.evaluations,
        "budget": budget,
        "seed": seed,
        "provenance": provenance(r.exact),
    })))
}

fn sum_cmd(ctx: &Ctx, cmd: &SumCmd) -> Result<Output, CliError> {
    match cmd {
        SumCmd::Build { kind, parts } => {
            let parts = parts
                .iter()
                .map(|p| space_from_value(&read_json(p)?))
                .collect::<Result<Vec<_>, _>>()?;
            let s = match kind {
                SumKindArg::L1 => l1_sum(parts)?,
                SumKindArg::Linf => linf_sum(parts)?,
            };
            Ok(Output::new(json!({
                "dim": s.dim(),
                "space": space_to_value(&s),
                "provenance": provenance(true),
            })))
        }
        SumCmd::Extend { with, mode } => {
            let (_, op) = ctx.operator()?;
            let z = space_from_value(&read_json(with)?)?;
            let tol = ctx.g.tol.unwrap_or(1e-9);
            with_op!(&op, t => {
                let e = match mode {
                    ExtendMode::Zero => extend_by_zero(t, &z)?,
                    ExtendMode::Isometry => extend_isometry(t, &z, tol)?,
                };
                extension_report(t, &e)
            })
        }
    }
}

fn extension_report<S: Scalar>(s: &Operator<S>, e: &Extension<S>) -> Result<Output, CliError> {
    let ns = op_norm(s);
    let nt = op_norm(&e.operator);
    Ok(Output::new(json!({
        "operator": operator_to_value(&e.operator),
        "construction": e.provenance.name(),
        "summand_dim": e.summand_dim,
        "norm_summand": estimate(ns.value, ns.exact),
        "norm_extension": estimate(nt.value, nt.exact),
    })))
}

fn e_space(e: EArg, k: u32, m: u64) -> Result<PlSpace, CliError> {
    let grid = cantor_grid(k, m)?;
    let basis = match e {
        EArg::Zero => vec![Vec::new(); grid.cantor_nodes.len()],
        EArg::Constants => e_basis_for(EKind::Constants, &grid)?.0,
        EArg::L2Plane => e_basis_for(EKind::L2Plane, &grid)?.0,
    };
    Ok(build_XE(&grid, &basis)?)
}

fn e_name(e: EArg) -> &'static str {
    match e {
        EArg::Zero => "zero",
        EArg::Constants => "constants",
        EArg::L2Plane => "l2_2",
    }
}

fn cantor_cmd(ctx: &Ctx, cmd: &CantorCmd) -> Result<Output, CliError> {
    match cmd {
        CantorCmd::Grid { grid } => {
            let c = cantor_grid(grid.k, grid.m)?;
            let mut table = Table::new(&["index", "t", "cantor"]);
            let cantor: std::collections::BTreeSet<usize> = c.cantor_nodes.iter().copied().collect();
            for (i, t) in c.nodes.iter().enumerate() {
                table.push(vec![i.to_string(), t.to_string(), cantor.contains(&i).to_string()]);
            }
            let removed: Vec<Value> = c.removed_intervals().iter().map(|(a, b)| json!([num(*a), num(*b)])).collect();
            Ok(Output::new(json!({
                "k": c.level,
                "m": c.m,
                "cantor_nodes": c.cantor_nodes,
                "gap_nodes": c.gap_nodes,
                "removed_intervals": removed,
                "provenance": provenance(true),
            }))
            .with_table(table))
        }
        CantorCmd::Build { grid, e } => {
            let xe = e_space(*e, grid.k, grid.m)?;
            Ok(Output::new(json!({
                "e": e_name(*e),
                "dim": xe.dim(),
                "e_dim": xe.e_dim,
                "gap_count": xe.grid.gap_nodes.len(),
                "space": space_to_value(&xe.space),
                "provenance": provenance(true),
            })))
        }
        CantorCmd::Bump { grid, e, lo, hi } => {
            let xe = e_space(*e, grid.k, grid.m)?;
            let b = match urysohn_bump(&xe, (*lo, *hi)) {
                Ok(b) => b,
                Err(Error::Precondition(msg)) => return Err(CliError::Check(msg)),
                Err(other) => return Err(other.into()),
            };
            let n = normlab_core::norm(&xe.space, &b.coords)?;
            Ok(Output::new(json!({
                "node": b.node,
                "t": num(xe.grid.nodes[b.node]),
                "coords": b.coords,
                "values": b.values,
                "norm": num(n),
                "provenance": provenance(true),
            })))
        }
        CantorCmd::Quotient { grid, e } => {
            let xe = e_space(*e, grid.k, grid.m)?;
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.g.seed);
            let mut samples = Vec::with_capacity(ctx.g.budget);
            while samples.len() < ctx.g.budget && xe.e_dim > 0 {
                let a: Vec<f64> = (0..xe.e_dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let n = xe.e_norm(&a);
                if n == 0.0 {
                    continue;
                }
                let r: f64 = rng.gen_range(0.0..1.0);
                samples.push(a.iter().map(|v| v * r / n).collect());
            }
            let tol = ctx.g.tol.unwrap_or(1e-10);
            let q = quotient_isometry_check(&xe, &samples, tol)?;
            Ok(Output::new(json!({
                "samples": q.samples,
                "max_norm_gap": num(q.max_norm_gap),
                "restriction_exact": q.restriction_exact,
                "phi_norm": num(q.phi_norm),
                "holds": q.holds,
                "tol": num(tol),
                "provenance": provenance(true),
            }))
            .fail_if(!q.holds, "quotient ball identity failed"))
        }
        CantorCmd::Experiment { e, k, m_list } => {
            let kind = match e {
                EArg::Constants => EKind::Constants,
                EArg::L2Plane => EKind::L2Plane,
                EArg::Zero => return Err(CliError::Usage("the experiment needs --e constants or l2_2".into())),
            };
            let r = main_example_experiment(kind, *k, m_list, ctx.g.budget, ctx.g.seed)?;
            let mut table = Table::new(&[
                "m",
                "dimX",
                "index_upper",
                "lie_dim_primal",
                "lie_dim_dual_model",
                "bump_coverage_fraction",
                "dual_rotation_drift",
            ]);
            let mut records = Vec::with_capacity(r.records.len());
            let mut model_ok = true;
            for x in &r.records {
                table.push(vec![
                    x.m.to_string(),
                    x.dim_x.to_string(),
                    x.index_upper.to_string(),
                    x.lie_dim_primal.to_string(),
                    x.lie_dim_dual_model.to_string(),
                    x.bump_coverage_fraction.to_string(),
                    x.dual_rotation_drift.map(|d| d.to_string()).unwrap_or_default(),
                ]);
                if kind == EKind::L2Plane {
                    model_ok &= x.lie_dim_dual_model >= 1 && x.dual_rotation_drift.is_some_and(|d| d <= 1e-9);
                }
                records.push(json!({
                    "m": x.m,
                    "dimX": x.dim_x,
                    "index_upper": estimate(x.index_upper, x.index_exact),
                    "lie_dim_primal": x.lie_dim_primal,
                    "lie_dim_dual_model": x.lie_dim_dual_model,
                    "dual_model_dim": x.dual_model_dim,
                    "bump_coverage_fraction": num(x.bump_coverage_fraction),
                    "dual_rotation_drift": x.dual_rotation_drift.map(num),
                    "provenance": provenance(true),
                }));
            }
            Ok(Output::new(json!({
                "e": kind.name(),
                "k": r.level,
                "records": records,
            }))
            .with_table(table)
            .fail_if(!model_ok, "rotation generator on the dual model is not an isometry group"))
        }
    }
}
