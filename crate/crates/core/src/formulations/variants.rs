//! Models for the selective, prize-collecting and time-window variants.

use serde::Serialize;

use super::stsp::{
    arc_binaries, arc_cost, balance, check_stages, commodity_rows, edge_parity, edge_terms_from_arcs, row, stage_cost,
    stage_departures, stage_rows, stage_vars, terms,
};
use super::{BuildOptions, Formulation, FormulationTag, LayerLayout};
use crate::bnb::CutDemand;
use crate::error::{Error, Result};
use crate::instance::{ArcSet, Instance, NodeId, Weight, DEPOT};
use crate::milp::{MilpModel, ObjSense, Sense, VarId, VarKind};

/// Budget `U` and revenues of the selective problem.
fn sop_data(inst: &Instance) -> Result<(f64, Vec<(NodeId, f64)>)> {
    let u = inst
        .budget()
        .ok_or_else(|| Error::MissingPayload("budget (BUDGET) is required".into()))?;
    let p = inst
        .customers()
        .into_iter()
        .map(|i| {
            inst.revenue(i)
                .map(|p| (i, p))
                .ok_or_else(|| Error::MissingPayload(format!("revenue of customer {i} is required")))
        })
        .collect::<Result<_>>()?;
    Ok((u, p))
}

/// Capacity `Q` and `(i, p_i, q_i)` of the prize-collecting problem.
fn scptp_data(inst: &Instance, opts: BuildOptions) -> Result<(f64, Vec<(NodeId, f64, f64)>)> {
    let q = inst
        .capacity()
        .ok_or_else(|| Error::MissingPayload("capacity (CAPACITY) is required".into()))?;
    let mut data = Vec::new();
    for i in inst.customers() {
        let p = inst
            .revenue(i)
            .ok_or_else(|| Error::MissingPayload(format!("revenue of customer {i} is required")))?;
        let d = inst
            .demand(i)
            .ok_or_else(|| Error::MissingPayload(format!("demand of customer {i} is required")))?;
        data.push((i, p, d));
    }
    let total: f64 = data.iter().map(|t| t.2).sum();
    if q > total && !opts.allow_excess_capacity {
        return Err(Error::InvalidInstance(format!(
            "capacity {q} exceeds total demand {total}; pass the excess-capacity option to accept it"
        )));
    }
    Ok((q, data))
}

/// One binary `y_i` per customer, fixed to 0 when the customer has no edges.
fn service_vars(m: &mut MilpModel, inst: &Instance) -> Result<Vec<(NodeId, VarId)>> {
    inst.customers()
        .into_iter()
        .map(|i| {
            let ub = if inst.degree(i) == 0 { 0.0 } else { 1.0 };
            Ok((i, m.add_variable(format!("y_{i}"), 0.0, ub, VarKind::Binary)?))
        })
        .collect()
}

/// Budget or capacity side rows plus the objective, given the routing cost terms.
fn finish(
    m: &mut MilpModel,
    inst: &Instance,
    tag: FormulationTag,
    opts: BuildOptions,
    y: &[(NodeId, VarId)],
    cost: Vec<(VarId, f64)>,
) -> Result<()> {
    match tag.problem() {
        super::Problem::Sop => {
            let (u, p) = sop_data(inst)?;
            m.add_constraint("budget", cost, Sense::Le, u)?;
            let obj = y.iter().zip(&p).map(|(&(_, v), &(_, pi))| (v, pi)).collect();
            m.set_objective(ObjSense::Maximize, obj)
        }
        super::Problem::Scptp => {
            let (q, data) = scptp_data(inst, opts)?;
            let load = y.iter().zip(&data).map(|(&(_, v), d)| (v, d.2)).collect();
            row(m, "capacity".into(), load, Sense::Le, q)?;
            let mut obj: Vec<(VarId, f64)> = y.iter().zip(&data).map(|(&(_, v), d)| (v, d.1)).collect();
            obj.extend(cost.into_iter().map(|(v, c)| (v, -c)));
            m.set_objective(ObjSense::Maximize, obj)
        }
        _ => unreachable!("variant builders only serve SOP and SCPTP tags"),
    }
}

fn with_services(mut f: Formulation, y: &[(NodeId, VarId)]) -> Formulation {
    f.service_terms = y.iter().map(|&(i, v)| (i, vec![v])).collect();
    f
}

/// Edge model with parity rows and cuts `x(δ(S)) >= 2 y_k`.
pub(super) fn cut(inst: &Instance, tag: FormulationTag, opts: BuildOptions) -> Result<Formulation> {
    let mut m = MilpModel::new();
    let (x, z) = edge_parity(&mut m, inst)?;
    let y = service_vars(&mut m, inst)?;
    for &(i, yi) in &y {
        if let Some(zi) = z[i] {
            m.add_constraint(format!("visit_{i}"), vec![(zi, 1.0), (yi, -1.0)], Sense::Ge, 0.0)?;
        }
    }
    let cost = inst.edges().iter().zip(&x).map(|(e, &v)| (v, e.cost)).collect();
    finish(&mut m, inst, tag, opts, &y, cost)?;
    let mut f = with_services(Formulation::new(tag, inst, m), &y);
    f.edge_terms = x.iter().map(|&v| vec![v]).collect();
    f.cut_targets = Some(y.iter().map(|&(i, v)| (i, CutDemand::Scaled(2.0, v))).collect());
    Ok(f)
}

/// Time-staged model. The first stage may stay empty so that serving
/// nobody remains feasible.
pub(super) fn ts(inst: &Instance, tag: FormulationTag, stages: usize, opts: BuildOptions) -> Result<Formulation> {
    check_stages(stages)?;
    let arcs = inst.arcs();
    let mut m = MilpModel::new();
    let r = stage_vars(&mut m, &arcs, stages)?;
    let y = service_vars(&mut m, inst)?;
    stage_rows(&mut m, inst, &arcs, &r, Sense::Le)?;
    for &(i, yi) in &y {
        let mut c = stage_departures(&arcs, &r, i);
        c.push((yi, -1.0));
        m.add_constraint(format!("ts_visit_{i}"), c, Sense::Ge, 0.0)?;
    }
    finish(&mut m, inst, tag, opts, &y, stage_cost(&arcs, &r))?;
    let mut f = with_services(Formulation::new(tag, inst, m), &y);
    let families: Vec<&[VarId]> = r.iter().map(Vec::as_slice).collect();
    f.edge_terms = edge_terms_from_arcs(&arcs, inst.edge_count(), &families);
    f.stages = Some(stages);
    Ok(f)
}

/// `Σ_{δ+(i)} xt >= y_i` per customer and in/out balance everywhere.
fn routing_rows(m: &mut MilpModel, inst: &Instance, arcs: &ArcSet, xt: &[VarId], y: &[(NodeId, VarId)]) -> Result<()> {
    for &(i, yi) in y {
        let mut c = terms(arcs.outgoing(i), xt, 1.0);
        c.push((yi, -1.0));
        m.add_constraint(format!("xbound_{i}"), c, Sense::Ge, 0.0)?;
    }
    for i in inst.nodes() {
        row(m, format!("xflow_{i}"), balance(arcs, xt, i), Sense::Eq, 0.0)?;
    }
    Ok(())
}

/// The walk leaves the depot whenever some customer is served.
fn depot_departure_rows(m: &mut MilpModel, arcs: &ArcSet, xt: &[VarId], y: &[(NodeId, VarId)]) -> Result<()> {
    for &(i, yi) in y {
        let mut c = terms(arcs.outgoing(DEPOT), xt, 1.0);
        c.push((yi, -1.0));
        m.add_constraint(format!("depart_{i}"), c, Sense::Ge, 0.0)?;
    }
    Ok(())
}

/// Multi-commodity model; commodity `k` carries `y_k` units.
pub(super) fn mcf(inst: &Instance, tag: FormulationTag, opts: BuildOptions) -> Result<Formulation> {
    let arcs = inst.arcs();
    let mut m = MilpModel::new();
    let xt = arc_binaries(&mut m, &arcs, "xt", "")?;
    let mut f_vars = Vec::new();
    for k in inst.customers() {
        f_vars.push(arc_binaries(&mut m, &arcs, "f", &format!("_{k}"))?);
    }
    let y = service_vars(&mut m, inst)?;
    routing_rows(&mut m, inst, &arcs, &xt, &y)?;
    for (fk, &(k, yk)) in f_vars.iter().zip(&y) {
        commodity_rows(&mut m, inst, &arcs, &xt, fk, k, Some(yk))?;
    }
    if tag == FormulationTag::ScptpMcf {
        let (q, data) = scptp_data(inst, opts)?;
        for (a, arc) in arcs.iter() {
            let mut c: Vec<(VarId, f64)> = f_vars.iter().zip(&data).map(|(fk, d)| (fk[a], d.2)).collect();
            c.push((xt[a], -q));
            m.add_constraint(format!("load_{}_{}", arc.tail, arc.head), c, Sense::Le, 0.0)?;
        }
    }
    finish(&mut m, inst, tag, opts, &y, arc_cost(&arcs, &xt))?;
    let mut f = with_services(Formulation::new(tag, inst, m), &y);
    f.edge_terms = edge_terms_from_arcs(&arcs, inst.edge_count(), &[&xt]);
    Ok(f)
}

fn flow_vars(m: &mut MilpModel, arcs: &ArcSet) -> Result<Vec<VarId>> {
    arcs.iter()
        .map(|(_, a)| m.add_continuous(format!("g_{}_{}", a.tail, a.head), 0.0, f64::INFINITY))
        .collect()
}

/// Selective single-commodity model: `g_a` is the cost spent before
/// traversing `a`. `strong` adds shortest-path bounds on `g`.
pub(super) fn sop_scf(inst: &Instance, strong: bool) -> Result<Formulation> {
    let tag = if strong { FormulationTag::SopScfStrong } else { FormulationTag::SopScf };
    let (u, _) = sop_data(inst)?;
    let arcs = inst.arcs();
    let mut m = MilpModel::new();
    let xt = arc_binaries(&mut m, &arcs, "xt", "")?;
    let g = flow_vars(&mut m, &arcs)?;
    let y = service_vars(&mut m, inst)?;
    depot_departure_rows(&mut m, &arcs, &xt, &y)?;
    routing_rows(&mut m, inst, &arcs, &xt, &y)?;
    for i in inst.nodes().filter(|&i| i != DEPOT) {
        let mut c = terms(arcs.outgoing(i), &g, 1.0);
        c.extend(terms(arcs.incoming(i), &g, -1.0));
        c.extend(arcs.incoming(i).iter().map(|&a| (xt[a], -arcs.get(a).cost)));
        row(&mut m, format!("gcost_{i}"), c, Sense::Eq, 0.0)?;
    }
    let dist = inst.shortest_paths(DEPOT, Weight::Cost);
    let spc = |i: NodeId| dist.get(i).unwrap_or(0.0);
    for (a, arc) in arcs.iter() {
        let name = format!("{}_{}", arc.tail, arc.head);
        let mut cap = u - arc.cost;
        if strong {
            cap -= spc(arc.head);
            m.add_constraint(format!("glow_{name}"), vec![(g[a], 1.0), (xt[a], -spc(arc.tail))], Sense::Ge, 0.0)?;
        }
        m.add_constraint(format!("gcap_{name}"), vec![(g[a], 1.0), (xt[a], -cap)], Sense::Le, 0.0)?;
    }
    finish(&mut m, inst, tag, BuildOptions::default(), &y, arc_cost(&arcs, &xt))?;
    let mut f = with_services(Formulation::new(tag, inst, m), &y);
    f.edge_terms = edge_terms_from_arcs(&arcs, inst.edge_count(), &[&xt]);
    Ok(f)
}

/// Prize-collecting single-commodity model: `g_a` is the load still on board.
/// The capacity bound is implied by the flow rows, so no explicit row is added.
pub(super) fn scptp_scf(inst: &Instance, opts: BuildOptions) -> Result<Formulation> {
    let (q, data) = scptp_data(inst, opts)?;
    let arcs = inst.arcs();
    let mut m = MilpModel::new();
    let xt = arc_binaries(&mut m, &arcs, "xt", "")?;
    let g = flow_vars(&mut m, &arcs)?;
    let y = service_vars(&mut m, inst)?;
    depot_departure_rows(&mut m, &arcs, &xt, &y)?;
    routing_rows(&mut m, inst, &arcs, &xt, &y)?;
    row(&mut m, "load_depot".into(), balance(&arcs, &g, DEPOT), Sense::Le, q)?;
    let in_minus_out = |i: NodeId| {
        let mut c = terms(arcs.incoming(i), &g, 1.0);
        c.extend(terms(arcs.outgoing(i), &g, -1.0));
        c
    };
    for (&(i, yi), d) in y.iter().zip(&data) {
        let mut c = in_minus_out(i);
        c.push((yi, -d.2));
        m.add_constraint(format!("gload_{i}"), c, Sense::Eq, 0.0)?;
    }
    for i in inst.nodes().filter(|&i| i != DEPOT && !inst.is_customer(i)) {
        row(&mut m, format!("gflow_{i}"), in_minus_out(i), Sense::Eq, 0.0)?;
    }
    for (a, arc) in arcs.iter() {
        m.add_constraint(
            format!("gcap_{}_{}", arc.tail, arc.head),
            vec![(g[a], 1.0), (xt[a], -q)],
            Sense::Le,
            0.0,
        )?;
    }
    let obj_y: Vec<(VarId, f64)> = y.iter().zip(&data).map(|(&(_, v), d)| (v, d.1)).collect();
    let mut obj = obj_y;
    obj.extend(arc_cost(&arcs, &xt).into_iter().map(|(v, c)| (v, -c)));
    m.set_objective(ObjSense::Maximize, obj)?;
    let mut f = with_services(Formulation::new(FormulationTag::ScptpScf, inst, m), &y);
    f.edge_terms = edge_terms_from_arcs(&arcs, inst.edge_count(), &[&xt]);
    Ok(f)
}

/// Load collected by a prize-collecting solution and the capacity it must
/// respect: `(Σ q_i y_i, Q)`.
pub fn scptp_capacity_audit(inst: &Instance, f: &Formulation, x: &[f64]) -> Result<(f64, f64)> {
    let q = inst
        .capacity()
        .ok_or_else(|| Error::MissingPayload("capacity (CAPACITY) is required".into()))?;
    let load = f
        .service_levels(x)
        .into_iter()
        .map(|(i, level)| level * inst.demand(i).unwrap_or(0.0))
        .sum();
    Ok((load, q))
}

/// Layered model for time windows: layer `k` holds the arcs travelled after
/// the `k`-th service, `g` holds departure times.
pub(super) fn stsptw(inst: &Instance, exact: bool) -> Result<Formulation> {
    let horizon = inst
        .horizon()
        .ok_or_else(|| Error::MissingPayload("horizon (HORIZON) is required".into()))?;
    let customers = inst.customers();
    for &i in &customers {
        let (a, _) = inst.window(i).unwrap_or((0.0, horizon));
        if a + inst.service_time(i) > horizon {
            return Err(Error::InvalidInstance(format!(
                "infeasible window at node {i}: a + s = {} exceeds horizon {horizon}",
                a + inst.service_time(i)
            )));
        }
    }
    let n_r = customers.len();
    let arcs = inst.arcs();
    let mut m = MilpModel::new();
    let mut xt = Vec::with_capacity(n_r + 1);
    let mut g = Vec::with_capacity(n_r + 1);
    for k in 0..=n_r {
        xt.push(arc_binaries(&mut m, &arcs, "xt", &format!("_{k}"))?);
        g.push(
            arcs.iter()
                .map(|(_, a)| m.add_continuous(format!("g_{}_{}_{k}", a.tail, a.head), 0.0, horizon))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    // y[c][k - 1] for customer index c.
    let mut y = Vec::with_capacity(n_r);
    for &i in &customers {
        let ub = if inst.degree(i) == 0 { 0.0 } else { 1.0 };
        y.push(
            (1..=n_r)
                .map(|k| m.add_variable(format!("y_{i}_{k}"), 0.0, ub, VarKind::Binary))
                .collect::<Result<Vec<_>>>()?,
        );
    }

    if n_r > 0 {
        for (c, &i) in customers.iter().enumerate() {
            let once = y[c].iter().map(|&v| (v, 1.0)).collect();
            m.add_constraint(format!("serve_{i}"), once, Sense::Eq, 1.0)?;
        }
        for k in 1..=n_r {
            let slot = y.iter().map(|yc| (yc[k - 1], 1.0)).collect();
            m.add_constraint(format!("slot_{k}"), slot, Sense::Eq, 1.0)?;
        }
        row(&mut m, "dep_start".into(), terms(arcs.outgoing(DEPOT), &xt[0], 1.0), Sense::Eq, 1.0)?;
        for (k, xk) in xt.iter().enumerate().take(n_r).skip(1) {
            row(&mut m, format!("dep_bal_{k}"), balance(&arcs, xk, DEPOT), Sense::Eq, 0.0)?;
        }
        row(&mut m, "dep_end".into(), terms(arcs.incoming(DEPOT), &xt[n_r], 1.0), Sense::Eq, 1.0)?;
    }

    // Customer balance: arrivals in layer k either end layer k by a service
    // or leave again in layer k.
    for (c, &i) in customers.iter().enumerate() {
        for k in 0..=n_r {
            let mut t = terms(arcs.incoming(i), &xt[k], 1.0);
            t.extend(terms(arcs.outgoing(i), &xt[k], -1.0));
            if k >= 1 {
                t.push((y[c][k - 1], 1.0));
            }
            if k < n_r {
                t.push((y[c][k], -1.0));
            }
            row(&mut m, format!("bal_{i}_{k}"), t, Sense::Eq, 0.0)?;
        }
    }
    for i in inst.nodes().filter(|&i| i != DEPOT && !inst.is_customer(i)) {
        for (k, xk) in xt.iter().enumerate() {
            row(&mut m, format!("bal_{i}_{k}"), balance(&arcs, xk, i), Sense::Eq, 0.0)?;
        }
    }

    // Some optimal walk moves along a simple path between two services, so
    // each node is entered and left at most once per layer. With these rows
    // every time sum below has a single term and the schedule is exact.
    if exact {
        for i in inst.nodes() {
            for (k, xk) in xt.iter().enumerate() {
                row(&mut m, format!("in1_{i}_{k}"), terms(arcs.incoming(i), xk, 1.0), Sense::Le, 1.0)?;
                row(&mut m, format!("out1_{i}_{k}"), terms(arcs.outgoing(i), xk, 1.0), Sense::Le, 1.0)?;
            }
        }
    }

    let arrival = |k: usize, i: NodeId| -> Vec<(VarId, f64)> {
        let mut t = terms(arcs.incoming(i), &g[k], 1.0);
        t.extend(arcs.incoming(i).iter().map(|&a| (xt[k][a], arcs.get(a).time)));
        t
    };
    // Clock rows: departures never precede arrivals plus service. An arrival
    // that only passes through leaves in the same layer, so the exact model
    // switches the row off unless the arrival ends in a service.
    for (c, &i) in customers.iter().enumerate() {
        for k in 0..n_r {
            let mut t = terms(arcs.outgoing(i), &g[k + 1], 1.0);
            t.extend(arrival(k, i).into_iter().map(|(v, a)| (v, -a)));
            let (coef, rhs) = if exact {
                (-inst.service_time(i) - horizon, -horizon)
            } else {
                (-inst.service_time(i), 0.0)
            };
            t.push((y[c][k], coef));
            row(&mut m, format!("clock_{i}_{k}"), t, Sense::Ge, rhs)?;
        }
    }
    // Pass-through at a customer inside one layer. The arrival that ends the
    // layer in a service leaves only in the next layer, hence the relaxation.
    for (c, &i) in customers.iter().enumerate().filter(|_| exact) {
        for k in 0..=n_r {
            let mut t = terms(arcs.outgoing(i), &g[k], 1.0);
            t.extend(arrival(k, i).into_iter().map(|(v, a)| (v, -a)));
            if k < n_r {
                t.push((y[c][k], horizon));
            }
            row(&mut m, format!("pass_{i}_{k}"), t, Sense::Ge, 0.0)?;
        }
    }
    for i in inst.nodes().filter(|&i| !inst.is_customer(i)) {
        let last = if i == DEPOT { n_r.saturating_sub(1) } else { n_r };
        if i == DEPOT && n_r == 0 {
            continue;
        }
        for k in 0..=last {
            let mut t = terms(arcs.outgoing(i), &g[k], 1.0);
            t.extend(arrival(k, i).into_iter().map(|(v, a)| (v, -a)));
            row(&mut m, format!("clock_{i}_{k}"), t, Sense::Ge, 0.0)?;
        }
    }
    // Windows: leave no earlier than a_i + s_i, arrive no later than b_i.
    for (c, &i) in customers.iter().enumerate() {
        let (a, b) = inst.window(i).unwrap_or((0.0, horizon));
        let s = inst.service_time(i);
        for k in 1..=n_r {
            let mut lo = terms(arcs.outgoing(i), &g[k], 1.0);
            lo.push((y[c][k - 1], -(a + s)));
            row(&mut m, format!("win_lo_{i}_{k}"), lo, Sense::Ge, 0.0)?;
            let mut hi = arrival(k - 1, i);
            hi.push((y[c][k - 1], horizon - b));
            row(&mut m, format!("win_hi_{i}_{k}"), hi, Sense::Le, horizon)?;
        }
    }
    for k in 0..=n_r {
        for (a, arc) in arcs.iter() {
            m.add_constraint(
                format!("glink_{}_{}_{k}", arc.tail, arc.head),
                vec![(g[k][a], 1.0), (xt[k][a], -horizon)],
                Sense::Le,
                0.0,
            )?;
        }
    }
    if n_r > 0 && exact {
        row(&mut m, "return".into(), arrival(n_r, DEPOT), Sense::Le, horizon)?;
    }

    let cost = xt.iter().flat_map(|xk| arc_cost(&arcs, xk)).collect();
    m.set_objective(ObjSense::Minimize, cost)?;
    let mut f = Formulation::new(FormulationTag::Stsptw, inst, m);
    let families: Vec<&[VarId]> = xt.iter().map(Vec::as_slice).collect();
    f.edge_terms = edge_terms_from_arcs(&arcs, inst.edge_count(), &families);
    let y_layout: Vec<(NodeId, Vec<VarId>)> = customers.iter().copied().zip(y).collect();
    f.service_terms = y_layout.clone();
    f.layers = Some(LayerLayout { xt, y: y_layout });
    Ok(f)
}

/// One service in a time-window route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceEvent {
    pub node: NodeId,
    /// Index into [`StsptwRoute::walk`] where the service happens.
    pub position: usize,
    pub start: f64,
    pub end: f64,
}

/// Closed walk recovered layer by layer, with the earliest schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StsptwRoute {
    pub walk: Vec<NodeId>,
    pub services: Vec<ServiceEvent>,
    pub cost: f64,
    pub return_time: f64,
    /// Window or horizon violations of the earliest schedule (empty when feasible).
    pub violations: Vec<String>,
}

/// Directed trail from `s` to `t` using every arc of `layer` exactly once.
fn layer_trail(arcs: &ArcSet, layer: &[usize], s: NodeId, t: NodeId) -> Result<Vec<usize>> {
    let n = layer.iter().map(|&a| arcs.get(a).tail.max(arcs.get(a).head)).max().unwrap_or(0).max(s).max(t);
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for &a in layer.iter().rev() {
        out[arcs.get(a).tail].push(a);
    }
    // Hierholzer: arcs are collected in reverse order of the trail.
    let mut stack: Vec<(NodeId, Option<usize>)> = vec![(s, None)];
    let mut trail = Vec::with_capacity(layer.len());
    while let Some(&(v, via)) = stack.last() {
        if let Some(a) = out[v].pop() {
            stack.push((arcs.get(a).head, Some(a)));
        } else {
            stack.pop();
            if let Some(a) = via {
                trail.push(a);
            }
        }
    }
    trail.reverse();
    let end = trail.last().map(|&a| arcs.get(a).head).unwrap_or(s);
    if trail.len() != layer.len() || end != t {
        return Err(Error::Solution(format!(
            "layer arcs do not form one trail from {s} to {t}"
        )));
    }
    Ok(trail)
}

pub(super) fn route_from_layers(inst: &Instance, layout: &LayerLayout, x: &[f64]) -> Result<StsptwRoute> {
    let arcs = inst.arcs();
    let n_r = layout.y.len();
    let mut order = vec![DEPOT; n_r + 2];
    for (i, yi) in &layout.y {
        let slots: Vec<usize> = (1..=n_r).filter(|&k| x[yi[k - 1]] > 0.5).collect();
        match slots.as_slice() {
            [k] => order[*k] = *i,
            _ => return Err(Error::Solution(format!("customer {i} is not served exactly once"))),
        }
    }
    let horizon = inst.horizon().unwrap_or(f64::INFINITY);
    let mut walk = vec![DEPOT];
    let mut services = Vec::new();
    let mut violations = Vec::new();
    let (mut clock, mut cost) = (0.0, 0.0);
    for (k, xk) in layout.xt.iter().enumerate() {
        let used: Vec<usize> = (0..arcs.len()).filter(|&a| x[xk[a]] > 0.5).collect();
        let (s, t) = (order[k], order[k + 1]);
        for a in layer_trail(&arcs, &used, s, t)? {
            let arc = arcs.get(a);
            clock += arc.time;
            cost += arc.cost;
            walk.push(arc.head);
        }
        if k < n_r {
            let (a, b) = inst.window(t).unwrap_or((0.0, horizon));
            if clock > b + 1e-9 {
                violations.push(format!("node {t} reached at {clock} after window end {b}"));
            }
            let start = clock.max(a);
            clock = start + inst.service_time(t);
            services.push(ServiceEvent {
                node: t,
                position: walk.len() - 1,
                start,
                end: clock,
            });
        }
    }
    if clock > horizon + 1e-9 {
        violations.push(format!("return at {clock} after horizon {horizon}"));
    }
    Ok(StsptwRoute {
        walk,
        services,
        cost,
        return_time: clock,
        violations,
    })
}
