//! Models for the plain Steiner TSP.

use super::{Formulation, FormulationTag};
use crate::bnb::CutDemand;
use crate::error::{Error, Result};
use crate::instance::{ArcSet, Instance, NodeId, DEPOT};
use crate::milp::{MilpModel, ObjSense, Sense, VarId};

/// Terms `coef * var[a]` for each arc `a` in `arcs`.
pub(super) fn terms(arcs: &[usize], var: &[VarId], coef: f64) -> Vec<(VarId, f64)> {
    arcs.iter().map(|&a| (var[a], coef)).collect()
}

/// Out-minus-in terms of an arc-indexed variable family at `i`.
pub(super) fn balance(arcs: &ArcSet, var: &[VarId], i: NodeId) -> Vec<(VarId, f64)> {
    let mut t = terms(arcs.outgoing(i), var, 1.0);
    t.extend(terms(arcs.incoming(i), var, -1.0));
    t
}

/// Adds the row unless it has no terms (isolated node).
pub(super) fn row(m: &mut MilpModel, name: String, coeffs: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> Result<()> {
    if coeffs.is_empty() {
        let ok = match sense {
            Sense::Le => rhs >= 0.0,
            Sense::Ge => rhs <= 0.0,
            Sense::Eq => rhs == 0.0,
        };
        if !ok {
            return Err(Error::Infeasible(format!("row `{name}` has no terms but needs {} {rhs}", sense.symbol())));
        }
        return Ok(());
    }
    m.add_constraint(name, coeffs, sense, rhs).map(|_| ())
}

/// One binary `xt_i_j` per arc.
pub(super) fn arc_binaries(m: &mut MilpModel, arcs: &ArcSet, prefix: &str, suffix: &str) -> Result<Vec<VarId>> {
    arcs.iter()
        .map(|(_, arc)| m.add_binary(format!("{prefix}_{}_{}{suffix}", arc.tail, arc.head)))
        .collect()
}

/// Both arcs of every edge contribute to `x_e`.
pub(super) fn edge_terms_from_arcs(arcs: &ArcSet, edges: usize, families: &[&[VarId]]) -> Vec<Vec<VarId>> {
    (0..edges)
        .map(|e| {
            let (a, b) = arcs.arcs_of_edge(e);
            families.iter().flat_map(|v| [v[a], v[b]]).collect()
        })
        .collect()
}

pub(super) fn arc_cost(arcs: &ArcSet, var: &[VarId]) -> Vec<(VarId, f64)> {
    arcs.iter().map(|(a, arc)| (var[a], arc.cost)).collect()
}

/// Integer `x_e in [0, 2]` and parity `x(δ(i)) = 2 z_i`; returns `(x, z)`
/// where `z[i]` is `None` for isolated nodes.
pub(super) fn edge_parity(m: &mut MilpModel, inst: &Instance) -> Result<(Vec<VarId>, Vec<Option<VarId>>)> {
    let x = inst
        .edges()
        .iter()
        .map(|e| m.add_integer(format!("x_{}_{}", e.u, e.v), 0.0, 2.0))
        .collect::<Result<Vec<_>>>()?;
    let mut z = vec![None; inst.node_count() + 1];
    for i in inst.nodes() {
        let deg = inst.degree(i);
        if deg == 0 {
            continue;
        }
        let zi = m.add_integer(format!("z_{i}"), 0.0, deg as f64)?;
        z[i] = Some(zi);
        let mut c: Vec<(VarId, f64)> = inst.neighbours(i).iter().map(|&(_, e)| (x[e], 1.0)).collect();
        c.push((zi, -2.0));
        m.add_constraint(format!("par_{i}"), c, Sense::Eq, 0.0)?;
    }
    Ok((x, z))
}

/// Edge model with parity rows; connectivity is separated on the fly.
pub(super) fn classical(inst: &Instance) -> Result<Formulation> {
    let mut m = MilpModel::new();
    let (x, z) = edge_parity(&mut m, inst)?;
    let required = inst.stsp_required();
    if required.len() >= 2 {
        for &i in &required {
            let zi = z[i].ok_or_else(|| Error::Infeasible(format!("required node {i} has no edges")))?;
            m.add_constraint(format!("visit_{i}"), vec![(zi, 1.0)], Sense::Ge, 1.0)?;
        }
    }
    let obj = inst.edges().iter().zip(&x).map(|(e, &v)| (v, e.cost)).collect();
    m.set_objective(ObjSense::Minimize, obj)?;
    let mut f = Formulation::new(FormulationTag::ClassicalCut, inst, m);
    f.edge_terms = x.iter().map(|&v| vec![v]).collect();
    f.service_terms = required.iter().map(|&i| (i, Vec::new())).collect();
    f.cut_targets = Some(
        required
            .iter()
            .filter(|&&k| k != DEPOT)
            .map(|&k| (k, CutDemand::Constant(2.0)))
            .collect(),
    );
    Ok(f)
}

/// Arc routing rows shared by the flow models: `Σ_{δ+(i)} xt >= 1` on the
/// required nodes and in/out balance everywhere.
fn routing_rows(m: &mut MilpModel, inst: &Instance, arcs: &ArcSet, xt: &[VarId]) -> Result<()> {
    let required = inst.stsp_required();
    if required.len() >= 2 {
        for &i in &required {
            row(m, format!("xbound_{i}"), terms(arcs.outgoing(i), xt, 1.0), Sense::Ge, 1.0)?;
        }
    }
    for i in inst.nodes() {
        row(m, format!("xflow_{i}"), balance(arcs, xt, i), Sense::Eq, 0.0)?;
    }
    Ok(())
}

/// Single-commodity flow: one unit of `g` is dropped at every customer.
/// `strong` tightens the linking coefficient with the rank vector.
pub(super) fn scf(inst: &Instance, strong: bool) -> Result<Formulation> {
    let arcs = inst.arcs();
    let mut m = MilpModel::new();
    let xt = arc_binaries(&mut m, &arcs, "xt", "")?;
    let g = arcs
        .iter()
        .map(|(_, a)| m.add_continuous(format!("g_{}_{}", a.tail, a.head), 0.0, f64::INFINITY))
        .collect::<Result<Vec<_>>>()?;
    routing_rows(&mut m, inst, &arcs, &xt)?;
    for i in inst.nodes().filter(|&i| i != DEPOT) {
        let rhs = if inst.is_required(i) { 1.0 } else { 0.0 };
        let mut c = terms(arcs.incoming(i), &g, 1.0);
        c.extend(terms(arcs.outgoing(i), &g, -1.0));
        row(&mut m, format!("gflow_{i}"), c, Sense::Eq, rhs)?;
    }
    let n_r = inst.stsp_required().len() as f64;
    let ranks = if strong { Some(inst.compute_ranks()?) } else { None };
    for (a, arc) in arcs.iter() {
        let k = match &ranks {
            Some(r) => n_r - r.get(arc.tail) as f64 - 1.0,
            None => n_r - 1.0,
        };
        m.add_constraint(
            format!("cap_{}_{}", arc.tail, arc.head),
            vec![(g[a], 1.0), (xt[a], -k)],
            Sense::Le,
            0.0,
        )?;
    }
    m.set_objective(ObjSense::Minimize, arc_cost(&arcs, &xt))?;
    let tag = if strong { FormulationTag::ScfStrong } else { FormulationTag::Scf };
    let mut f = Formulation::new(tag, inst, m);
    f.edge_terms = edge_terms_from_arcs(&arcs, inst.edge_count(), &[&xt]);
    f.service_terms = inst.stsp_required().into_iter().map(|i| (i, Vec::new())).collect();
    Ok(f)
}

/// Multi-commodity flow with one binary commodity per customer.
pub(super) fn mcf(inst: &Instance) -> Result<Formulation> {
    let arcs = inst.arcs();
    let mut m = MilpModel::new();
    let xt = arc_binaries(&mut m, &arcs, "xt", "")?;
    let customers = inst.customers();
    let mut f_vars = Vec::with_capacity(customers.len());
    for &k in &customers {
        f_vars.push(arc_binaries(&mut m, &arcs, "f", &format!("_{k}"))?);
    }
    routing_rows(&mut m, inst, &arcs, &xt)?;
    for (ci, &k) in customers.iter().enumerate() {
        commodity_rows(&mut m, inst, &arcs, &xt, &f_vars[ci], k, None)?;
    }
    m.set_objective(ObjSense::Minimize, arc_cost(&arcs, &xt))?;
    let mut f = Formulation::new(FormulationTag::Mcf, inst, m);
    f.edge_terms = edge_terms_from_arcs(&arcs, inst.edge_count(), &[&xt]);
    f.service_terms = inst.stsp_required().into_iter().map(|i| (i, Vec::new())).collect();
    Ok(f)
}

/// Conservation, source, sink and linking rows of commodity `k`. The source
/// and sink carry `y_k` units when `y` is given, one unit otherwise.
pub(super) fn commodity_rows(
    m: &mut MilpModel,
    inst: &Instance,
    arcs: &ArcSet,
    xt: &[VarId],
    f: &[VarId],
    k: NodeId,
    y: Option<VarId>,
) -> Result<()> {
    let in_minus_out = |i: NodeId| {
        let mut c = terms(arcs.incoming(i), f, 1.0);
        c.extend(terms(arcs.outgoing(i), f, -1.0));
        c
    };
    for i in inst.nodes().filter(|&i| i != DEPOT && i != k) {
        row(m, format!("fflow_{i}_{k}"), in_minus_out(i), Sense::Eq, 0.0)?;
    }
    let mut sink = in_minus_out(k);
    let mut source = in_minus_out(DEPOT);
    let rhs = match y {
        Some(y) => {
            sink.push((y, -1.0));
            source.push((y, 1.0));
            0.0
        }
        None => 1.0,
    };
    row(m, format!("fin_{k}"), sink, Sense::Eq, rhs)?;
    row(m, format!("fout_{k}"), source, Sense::Eq, -rhs)?;
    for (a, arc) in arcs.iter() {
        m.add_constraint(
            format!("fbound_{}_{}_{k}", arc.tail, arc.head),
            vec![(xt[a], 1.0), (f[a], -1.0)],
            Sense::Ge,
            0.0,
        )?;
    }
    Ok(())
}

/// `r_i_j_k` for `k = 1..=stages`; stage-1 arcs not leaving the depot are
/// fixed to zero. Returns `r[k - 1][a]`.
pub(super) fn stage_vars(m: &mut MilpModel, arcs: &ArcSet, stages: usize) -> Result<Vec<Vec<VarId>>> {
    (1..=stages)
        .map(|k| {
            arcs.iter()
                .map(|(_, arc)| {
                    let ub = if k == 1 && arc.tail != DEPOT { 0.0 } else { 1.0 };
                    m.add_variable(
                        format!("r_{}_{}_{k}", arc.tail, arc.head),
                        0.0,
                        ub,
                        crate::milp::VarKind::Binary,
                    )
                })
                .collect()
        })
        .collect()
}

/// Stage linking rows. Away from the depot a walk that arrives at stage `k`
/// leaves at stage `k + 1`; at the depot it may instead stop for good.
pub(super) fn stage_rows(m: &mut MilpModel, inst: &Instance, arcs: &ArcSet, r: &[Vec<VarId>], start: Sense) -> Result<()> {
    let start_rhs = 1.0;
    row(m, "ts_start".into(), terms(arcs.outgoing(DEPOT), &r[0], 1.0), start, start_rhs)?;
    let mut depot = Vec::new();
    for rk in r {
        depot.extend(balance(arcs, rk, DEPOT));
    }
    row(m, "ts_depot".into(), depot, Sense::Eq, 0.0)?;
    for k in 0..r.len().saturating_sub(1) {
        for i in inst.nodes() {
            let mut c = terms(arcs.incoming(i), &r[k], 1.0);
            c.extend(terms(arcs.outgoing(i), &r[k + 1], -1.0));
            let sense = if i == DEPOT { Sense::Ge } else { Sense::Eq };
            row(m, format!("ts_flow_{i}_{}", k + 1), c, sense, 0.0)?;
        }
    }
    Ok(())
}

/// Total departures from `i` over all stages.
pub(super) fn stage_departures(arcs: &ArcSet, r: &[Vec<VarId>], i: NodeId) -> Vec<(VarId, f64)> {
    r.iter().flat_map(|rk| terms(arcs.outgoing(i), rk, 1.0)).collect()
}

pub(super) fn stage_cost(arcs: &ArcSet, r: &[Vec<VarId>]) -> Vec<(VarId, f64)> {
    r.iter().flat_map(|rk| arc_cost(arcs, rk)).collect()
}

pub(super) fn check_stages(stages: usize) -> Result<()> {
    if stages < 2 {
        return Err(Error::InvalidArgument(format!("stage count {stages} is below 2")));
    }
    Ok(())
}

/// Time-staged walk model: `r_a^k = 1` when the `k`-th traversal uses arc `a`.
pub(super) fn ts(inst: &Instance, tag: FormulationTag, stages: usize) -> Result<Formulation> {
    check_stages(stages)?;
    let arcs = inst.arcs();
    let mut m = MilpModel::new();
    let r = stage_vars(&mut m, &arcs, stages)?;
    let required = inst.stsp_required();
    let start = if required.len() >= 2 { Sense::Eq } else { Sense::Le };
    stage_rows(&mut m, inst, &arcs, &r, start)?;
    if required.len() >= 2 {
        for &i in &required {
            row(&mut m, format!("ts_visit_{i}"), stage_departures(&arcs, &r, i), Sense::Ge, 1.0)?;
        }
    }
    m.set_objective(ObjSense::Minimize, stage_cost(&arcs, &r))?;
    let mut f = Formulation::new(tag, inst, m);
    let families: Vec<&[VarId]> = r.iter().map(Vec::as_slice).collect();
    f.edge_terms = edge_terms_from_arcs(&arcs, inst.edge_count(), &families);
    f.service_terms = required.into_iter().map(|i| (i, Vec::new())).collect();
    f.stages = Some(stages);
    Ok(f)
}
