//! One-call build, solve and interpret for a formulation tag.

use std::time::Instant;

use serde::Serialize;

use crate::bnb::{solve_milp, BnbOptions, MilpSolution, MilpStatus, Separator};
use crate::error::{Error, Result};
use crate::formulations::{build, BuildOptions, Formulation, FormulationTag, Problem};
use crate::instance::{Instance, NodeId, DEPOT};
use crate::milp::ModelStats;
use crate::oracle::{ScheduleStep, WalkSolution};

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub build: BuildOptions,
    pub bnb: BnbOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveStats {
    pub model: ModelStats,
    pub nodes: usize,
    pub cuts_added: usize,
    pub lp_iterations: usize,
    pub root_bound: Option<f64>,
    pub bound: f64,
    /// Wall-clock time; left out of JSON so outputs stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

/// Result of [`solve_instance`], also the JSON solution file.
#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub tag: FormulationTag,
    pub instance: String,
    pub status: MilpStatus,
    pub objective: Option<f64>,
    pub solution: Option<WalkSolution>,
    pub stats: SolveStats,
}

/// Builds `tag`, runs branch and bound (with separation for cut tags) and
/// turns the incumbent into a walk.
pub fn solve_instance(inst: &Instance, tag: FormulationTag, opts: &SolveOptions) -> Result<SolveOutcome> {
    let f = build(inst, tag, opts.build)?;
    let started = Instant::now();
    let sol = solve_formulation(&f, &opts.bnb)?;
    let seconds = started.elapsed().as_secs_f64();
    log::info!(
        "{tag}: {:?} objective {:?} after {} nodes, {} cuts",
        sol.status,
        sol.objective,
        sol.nodes,
        sol.cuts_added
    );
    let solution = match &sol.x {
        Some(x) => Some(interpret(inst, &f, x)?),
        None => None,
    };
    Ok(SolveOutcome {
        tag,
        instance: inst.fingerprint(),
        status: sol.status,
        objective: sol.objective,
        solution,
        stats: SolveStats {
            model: f.model.stats(),
            nodes: sol.nodes,
            cuts_added: sol.cuts_added,
            lp_iterations: sol.lp_iterations,
            root_bound: sol.root_bound,
            bound: sol.bound,
            seconds,
        },
    })
}

/// Branch and bound on a built formulation, wiring in its separator.
pub fn solve_formulation(f: &Formulation, opts: &BnbOptions) -> Result<MilpSolution> {
    let mut sep = f.separator();
    let sep_ref = sep.as_mut().map(|s| s as &mut dyn Separator);
    solve_milp(&f.model, sep_ref, opts)
}

/// Walk witness of an integral point.
pub fn interpret(inst: &Instance, f: &Formulation, x: &[f64]) -> Result<WalkSolution> {
    if f.tag.problem() == Problem::Stsptw {
        let route = f.stsptw_route(inst, x)?;
        if let Some(v) = route.violations.first() {
            return Err(Error::Solution(format!("layered solution has no valid schedule: {v}")));
        }
        let mut edge_uses = vec![0u32; inst.edge_count()];
        for w in route.walk.windows(2) {
            edge_uses[inst.edge_between(w[0], w[1]).expect("route follows edges")] += 1;
        }
        let mut schedule: Vec<ScheduleStep> = Vec::with_capacity(route.walk.len());
        let mut clock = 0.0;
        for (p, &node) in route.walk.iter().enumerate() {
            if p > 0 {
                let e = inst.edge_between(route.walk[p - 1], node).expect("route follows edges");
                clock += inst.edge(e).travel_time();
            }
            let arrival = clock;
            let service = route.services.iter().find(|s| s.position == p);
            if let Some(s) = service {
                clock = s.end;
            }
            schedule.push(ScheduleStep {
                node,
                arrival,
                service_start: service.map(|s| s.start),
                departure: clock,
            });
        }
        return Ok(WalkSolution {
            cost: route.cost,
            edge_uses,
            walk: route.walk,
            served: route.services.iter().map(|s| s.node).collect(),
            schedule: Some(schedule),
        });
    }
    let uses = depot_component(inst, &f.extract_edge_uses(x)?);
    let served: Vec<NodeId> = match f.tag.problem() {
        Problem::Stsp => inst.stsp_required(),
        _ => f.served(x),
    };
    WalkSolution::from_edge_uses(inst, uses, served)
}

/// Drops edge uses outside the depot's component of the support. Such
/// closed walks serve nobody and only show up when they cost nothing or
/// when the objective ignores cost.
pub fn depot_component(inst: &Instance, uses: &[u32]) -> Vec<u32> {
    let n = inst.node_count();
    let mut reach = vec![false; n + 1];
    reach[DEPOT] = true;
    let mut stack = vec![DEPOT];
    while let Some(v) = stack.pop() {
        for &(w, e) in inst.neighbours(v) {
            if uses[e] > 0 && !reach[w] {
                reach[w] = true;
                stack.push(w);
            }
        }
    }
    let kept: Vec<u32> = inst
        .edges()
        .iter()
        .zip(uses)
        .map(|(e, &k)| if reach[e.u] { k } else { 0 })
        .collect();
    if kept.as_slice() != uses {
        log::debug!("dropped edge uses detached from the depot");
    }
    kept
}
