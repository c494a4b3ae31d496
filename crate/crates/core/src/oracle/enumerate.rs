//! Enumeration of edge multiplicities in `{0, 1, 2}^E`.

use serde::Serialize;

use super::{WalkSolution, COST_TOL, MAX_STSP_EDGES, MAX_VARIANT_CUSTOMERS, MAX_VARIANT_EDGES};
use crate::error::{Error, Result};
use crate::formulations::Problem;
use crate::instance::{Instance, NodeId, DEPOT};

/// Depth-first search over edges in index order, values 0, 1, 2. Because
/// ties never replace the incumbent, the lexicographically smallest optimum
/// wins.
struct Search<'a> {
    inst: &'a Instance,
    required: Vec<bool>,
    /// Largest edge index touching each node.
    last_edge: Vec<Option<usize>>,
    cap: Option<u32>,
    x: Vec<u32>,
    deg: Vec<u32>,
    best: Option<(f64, Vec<u32>)>,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, required: &[NodeId], cap: Option<u32>) -> Self {
        let n = inst.node_count();
        let mut req = vec![false; n + 1];
        for &i in required {
            req[i] = true;
        }
        let mut last_edge = vec![None; n + 1];
        for (e, edge) in inst.edges().iter().enumerate() {
            last_edge[edge.u] = Some(e);
            last_edge[edge.v] = Some(e);
        }
        Search {
            inst,
            required: req,
            last_edge,
            cap,
            x: vec![0; inst.edge_count()],
            deg: vec![0; n + 1],
            best: None,
        }
    }

    fn run(mut self) -> Option<(f64, Vec<u32>)> {
        // A required node without edges can never be reached, unless it is
        // the depot and nothing else is needed.
        let only_depot = (1..self.required.len()).all(|i| !self.required[i] || i == DEPOT);
        if !only_depot && (1..self.required.len()).any(|i| self.required[i] && self.last_edge[i].is_none()) {
            return None;
        }
        self.dfs(0, 0.0, 0);
        self.best
    }

    fn dfs(&mut self, e: usize, cost: f64, total: u32) {
        if let Some((best, _)) = &self.best {
            if cost >= best - COST_TOL {
                return;
            }
        }
        if e == self.x.len() {
            if self.feasible() {
                self.best = Some((cost, self.x.clone()));
            }
            return;
        }
        let edge = self.inst.edge(e);
        for k in 0..=2u32 {
            if self.cap.is_some_and(|c| total + k > c) {
                break;
            }
            self.x[e] = k;
            self.deg[edge.u] += k;
            self.deg[edge.v] += k;
            if self.closed_ok(edge.u, e) && self.closed_ok(edge.v, e) {
                self.dfs(e + 1, cost + k as f64 * edge.cost, total + k);
            }
            self.deg[edge.u] -= k;
            self.deg[edge.v] -= k;
        }
        self.x[e] = 0;
    }

    /// Once a node's last edge is fixed its degree is final.
    fn closed_ok(&self, i: NodeId, e: usize) -> bool {
        if self.last_edge[i] != Some(e) {
            return true;
        }
        let d = self.deg[i];
        d % 2 == 0 && (d > 0 || !self.required[i] || self.depot_alone())
    }

    fn depot_alone(&self) -> bool {
        (1..self.required.len()).all(|i| !self.required[i] || i == DEPOT)
    }

    /// Support is connected, contains the depot when non-empty and covers
    /// every required node.
    fn feasible(&self) -> bool {
        let n = self.deg.len() - 1;
        let mut parent: Vec<usize> = (0..=n).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        for (e, edge) in self.inst.edges().iter().enumerate() {
            if self.x[e] > 0 {
                let (a, b) = (find(&mut parent, edge.u), find(&mut parent, edge.v));
                parent[a] = b;
            }
        }
        let root = find(&mut parent, DEPOT);
        (1..=n).all(|i| {
            let touched = self.deg[i] > 0 || self.required[i];
            !touched || i == DEPOT && self.deg[i] == 0 && self.depot_alone() || find(&mut parent, i) == root
        })
    }
}

fn guard_edges(inst: &Instance, limit: usize) -> Result<()> {
    if inst.edge_count() > limit {
        return Err(Error::SizeGuard(format!(
            "{} edges exceed the oracle limit of {limit}",
            inst.edge_count()
        )));
    }
    Ok(())
}

/// Optimal Steiner TSP walk by exhaustive enumeration.
pub fn brute_force_stsp(inst: &Instance) -> Result<WalkSolution> {
    brute_force_stsp_capped(inst, None)
}

/// As [`brute_force_stsp`], restricted to `Σ x_e <= cap` when a cap is given.
pub fn brute_force_stsp_capped(inst: &Instance, cap: Option<u32>) -> Result<WalkSolution> {
    guard_edges(inst, MAX_STSP_EDGES)?;
    let required = inst.stsp_required();
    let (_, x) = Search::new(inst, &required, cap)
        .run()
        .ok_or_else(|| Error::Infeasible("no closed walk from the depot covers the required nodes".into()))?;
    WalkSolution::from_edge_uses(inst, x, required)
}

/// Best selection for the orienteering or prize-collecting problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantSolution {
    pub walk: WalkSolution,
    pub selected: Vec<NodeId>,
    pub objective: f64,
}

/// Enumerates every customer subset, solves the Steiner TSP on it by
/// enumeration and keeps the best subset meeting the budget or capacity.
pub fn brute_force_variant(inst: &Instance, problem: Problem) -> Result<VariantSolution> {
    guard_edges(inst, MAX_VARIANT_EDGES)?;
    let customers = inst.customers();
    if customers.len() > MAX_VARIANT_CUSTOMERS {
        return Err(Error::SizeGuard(format!(
            "{} customers exceed the oracle limit of {MAX_VARIANT_CUSTOMERS}",
            customers.len()
        )));
    }
    let revenue = |i: NodeId| {
        inst.revenue(i)
            .ok_or_else(|| Error::MissingPayload(format!("revenue of customer {i} is required")))
    };
    let (budget, capacity) = match problem {
        Problem::Sop => (
            Some(inst.budget().ok_or_else(|| Error::MissingPayload("budget is required".into()))?),
            None,
        ),
        Problem::Scptp => (
            None,
            Some(inst.capacity().ok_or_else(|| Error::MissingPayload("capacity is required".into()))?),
        ),
        _ => return Err(Error::InvalidArgument(format!("{problem:?} is not a selection problem"))),
    };
    let mut best: Option<(f64, Vec<NodeId>, Vec<u32>)> = None;
    for mask in 0u32..(1 << customers.len()) {
        let chosen: Vec<NodeId> = (0..customers.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| customers[b])
            .collect();
        let mut prize = 0.0;
        let mut load = 0.0;
        for &i in &chosen {
            prize += revenue(i)?;
            if capacity.is_some() {
                load += inst
                    .demand(i)
                    .ok_or_else(|| Error::MissingPayload(format!("demand of customer {i} is required")))?;
            }
        }
        if capacity.is_some_and(|q| load > q + COST_TOL) {
            continue;
        }
        let mut required = chosen.clone();
        required.push(DEPOT);
        let Some((cost, x)) = Search::new(inst, &required, None).run() else {
            continue;
        };
        if budget.is_some_and(|u| cost > u + COST_TOL) {
            continue;
        }
        let value = if capacity.is_some() { prize - cost } else { prize };
        if best.as_ref().is_none_or(|b| value > b.0 + COST_TOL) {
            best = Some((value, chosen, x));
        }
    }
    let (objective, selected, x) = best.expect("the empty selection is always feasible");
    Ok(VariantSolution {
        walk: WalkSolution::from_edge_uses(inst, x, selected.clone())?,
        selected,
        objective,
    })
}
