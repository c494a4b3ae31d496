//! Brute-force ground truth for desk-sized instances, and walk verification.
//!
//! Nothing here shares code with the MILP path: the oracles enumerate edge
//! multiplicities or timed walks directly.

mod enumerate;
mod timed;
mod tsp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulations::Problem;
use crate::instance::{Instance, NodeId, DEPOT};

pub use enumerate::{brute_force_stsp, brute_force_stsp_capped, brute_force_variant, VariantSolution};
pub use timed::brute_force_stsptw;
pub use tsp::{held_karp, non_disconnecting_cycle};

/// Largest edge count [`brute_force_stsp`] accepts.
pub const MAX_STSP_EDGES: usize = 14;
/// Largest customer count [`brute_force_variant`] accepts.
pub const MAX_VARIANT_CUSTOMERS: usize = 8;
/// Largest edge count [`brute_force_variant`] accepts.
pub const MAX_VARIANT_EDGES: usize = 12;
/// Largest traversal budget `(n_R + 1)(|V| - 1)` [`brute_force_stsptw`] accepts.
pub const MAX_TIMED_TRAVERSALS: usize = 20;

const COST_TOL: f64 = 1e-6;

/// Clock values at one position of a timed walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub node: NodeId,
    pub arrival: f64,
    /// Start of service when the customer is served at this position.
    pub service_start: Option<f64>,
    pub departure: f64,
}

/// A closed walk from the depot with its edge multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSolution {
    pub edge_uses: Vec<u32>,
    /// Node sequence; first and last entries are the depot.
    pub walk: Vec<NodeId>,
    pub cost: f64,
    /// Customers served (every required node for the plain problem).
    pub served: Vec<NodeId>,
    /// One step per walk position, for time-window solutions.
    pub schedule: Option<Vec<ScheduleStep>>,
}

impl WalkSolution {
    /// Builds the Eulerian witness for an edge-use vector.
    pub fn from_edge_uses(inst: &Instance, edge_uses: Vec<u32>, served: Vec<NodeId>) -> Result<Self> {
        let walk = eulerian_walk(inst, &edge_uses)?;
        Ok(WalkSolution {
            cost: inst.walk_cost(&edge_uses),
            edge_uses,
            walk,
            served,
            schedule: None,
        })
    }

    /// Walk as `(tail, head)` arcs.
    pub fn arcs(&self) -> Vec<(NodeId, NodeId)> {
        self.walk.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn traversals(&self) -> u32 {
        self.edge_uses.iter().sum()
    }
}

/// Closed walk from the depot using edge `e` exactly `edge_uses[e]` times.
/// Neighbours are visited in increasing label order, so the walk is
/// deterministic.
pub fn eulerian_walk(inst: &Instance, edge_uses: &[u32]) -> Result<Vec<NodeId>> {
    if edge_uses.len() != inst.edge_count() {
        return Err(Error::Solution(format!(
            "edge-use vector has {} entries for {} edges",
            edge_uses.len(),
            inst.edge_count()
        )));
    }
    let n = inst.node_count();
    let mut deg = vec![0u32; n + 1];
    let mut adj: Vec<Vec<(NodeId, usize)>> = vec![Vec::new(); n + 1];
    for (e, edge) in inst.edges().iter().enumerate() {
        let k = edge_uses[e];
        deg[edge.u] += k;
        deg[edge.v] += k;
        for _ in 0..k {
            adj[edge.u].push((edge.v, e));
            adj[edge.v].push((edge.u, e));
        }
    }
    if let Some(i) = (1..=n).find(|&i| deg[i] % 2 == 1) {
        return Err(Error::Solution(format!("node {i} has odd degree {}", deg[i])));
    }
    let total: u32 = edge_uses.iter().sum();
    if total == 0 {
        return Ok(vec![DEPOT]);
    }
    // Popping from the back must yield the smallest neighbour first.
    for list in &mut adj {
        list.sort_unstable_by(|a, b| b.cmp(a));
    }
    let mut left = edge_uses.to_vec();
    let mut stack = vec![DEPOT];
    let mut walk = Vec::with_capacity(total as usize + 1);
    while let Some(&v) = stack.last() {
        let mut next = None;
        while let Some((w, e)) = adj[v].pop() {
            if left[e] > 0 {
                left[e] -= 1;
                // Drop the twin copy from the other endpoint.
                if let Some(p) = adj[w].iter().rposition(|&(x, f)| x == v && f == e) {
                    adj[w].remove(p);
                }
                next = Some(w);
                break;
            }
        }
        match next {
            Some(w) => stack.push(w),
            None => {
                walk.push(v);
                stack.pop();
            }
        }
    }
    walk.reverse();
    if walk.len() != total as usize + 1 {
        return Err(Error::Solution("edge support is not connected to the depot".into()));
    }
    Ok(walk)
}

/// Outcome of [`verify_walk`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first(&self) -> Option<&str> {
        self.failures.first().map(String::as_str)
    }
}

/// Checks the walk invariants and the constraints of `problem`, stopping at
/// the first violation.
pub fn verify_walk(inst: &Instance, sol: &WalkSolution, problem: Problem) -> VerifyReport {
    let mut report = VerifyReport::default();
    if let Err(msg) = check(inst, sol, problem) {
        report.failures.push(msg);
    }
    report
}

fn check(inst: &Instance, sol: &WalkSolution, problem: Problem) -> std::result::Result<(), String> {
    let walk = &sol.walk;
    if walk.first() != Some(&DEPOT) || walk.last() != Some(&DEPOT) {
        return Err("walk: must start and end at the depot".into());
    }
    if sol.edge_uses.len() != inst.edge_count() {
        return Err("edge uses: wrong length".into());
    }
    let mut counted = vec![0u32; inst.edge_count()];
    for w in walk.windows(2) {
        let e = inst
            .edge_between(w[0], w[1])
            .ok_or_else(|| format!("walk: no edge between {} and {}", w[0], w[1]))?;
        counted[e] += 1;
    }
    if counted != sol.edge_uses {
        return Err("walk: does not realise the edge-use vector".into());
    }
    let cost = inst.walk_cost(&sol.edge_uses);
    if (cost - sol.cost).abs() > COST_TOL {
        return Err(format!("cost: reported {} but the walk costs {cost}", sol.cost));
    }
    let on_walk = |i: NodeId| walk.contains(&i);
    match problem {
        Problem::Stsp => {
            if let Some(i) = inst.stsp_required().into_iter().find(|&i| !on_walk(i)) {
                return Err(format!("coverage: required node {i} is not visited"));
            }
        }
        _ => {
            for &i in &sol.served {
                if !inst.is_customer(i) {
                    return Err(format!("coverage: node {i} is not a customer"));
                }
                if !on_walk(i) {
                    return Err(format!("coverage: served node {i} is not visited"));
                }
            }
        }
    }
    match problem {
        Problem::Sop => {
            let u = inst.budget().ok_or("budget: instance has none")?;
            if cost > u + COST_TOL {
                return Err(format!("budget: cost {cost} exceeds {u}"));
            }
        }
        Problem::Scptp => {
            let q = inst.capacity().ok_or("capacity: instance has none")?;
            let load: f64 = sol.served.iter().map(|&i| inst.demand(i).unwrap_or(0.0)).sum();
            if load > q + COST_TOL {
                return Err(format!("capacity: load {load} exceeds {q}"));
            }
        }
        Problem::Stsptw => check_schedule(inst, sol)?,
        Problem::Stsp => {}
    }
    Ok(())
}

fn check_schedule(inst: &Instance, sol: &WalkSolution) -> std::result::Result<(), String> {
    let steps = sol.schedule.as_ref().ok_or("schedule: missing")?;
    if steps.len() != sol.walk.len() {
        return Err("schedule: one step per walk position expected".into());
    }
    let horizon = inst.horizon().ok_or("schedule: instance has no horizon")?;
    let mut served = Vec::new();
    for (p, step) in steps.iter().enumerate() {
        if step.node != sol.walk[p] {
            return Err(format!("schedule: step {p} is at node {} but the walk is at {}", step.node, sol.walk[p]));
        }
        let expected = if p == 0 {
            0.0
        } else {
            let e = inst.edge_between(sol.walk[p - 1], step.node).expect("walk edges checked");
            steps[p - 1].departure + inst.edge(e).travel_time()
        };
        if (step.arrival - expected).abs() > COST_TOL {
            return Err(format!("schedule: arrival at step {p} is {} but travel gives {expected}", step.arrival));
        }
        let mut ready = step.arrival;
        if let Some(start) = step.service_start {
            let i = step.node;
            if !inst.is_customer(i) {
                return Err(format!("schedule: node {i} is not a customer"));
            }
            let (a, b) = inst.window(i).unwrap_or((0.0, horizon));
            if start + COST_TOL < step.arrival {
                return Err(format!("schedule: service at {i} starts before arrival"));
            }
            if start + COST_TOL < a || start > b + COST_TOL {
                return Err(format!("window: service at node {i} starts at {start}, outside [{a}, {b}]"));
            }
            served.push(i);
            ready = start + inst.service_time(i);
        }
        if step.departure + COST_TOL < ready {
            return Err(format!("schedule: departure at step {p} precedes service end"));
        }
    }
    let back = steps.last().expect("walk is non-empty").arrival;
    if back > horizon + COST_TOL {
        return Err(format!("horizon: return at {back} exceeds {horizon}"));
    }
    let mut sorted = served.clone();
    sorted.sort_unstable();
    if sorted != inst.customers() {
        return Err("coverage: every customer must be served exactly once".into());
    }
    if served != sol.served {
        return Err("schedule: service events disagree with the served list".into());
    }
    Ok(())
}
