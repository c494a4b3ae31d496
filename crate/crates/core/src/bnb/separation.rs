//! Connectivity-cut separation by minimum cuts from the depot.

use std::collections::HashSet;

use super::maxflow::FlowNetwork;
use super::Separator;
use crate::instance::{Instance, NodeId, DEPOT};
use crate::milp::{Constraint, Sense, VarId};

/// Violation threshold for connectivity cuts.
pub const EPS_CUT: f64 = 1e-6;

/// A node set `S` (depot outside, the target node inside) with its cut value
/// `x(δ(S))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityCut {
    pub target: NodeId,
    pub set: Vec<NodeId>,
    pub value: f64,
}

/// Minimum depot-`k` cut for every `(k, demand)` whose capacity falls below
/// `demand - EPS_CUT`. `edges` carries `(u, v, x_e)` on nodes `1..=n`.
pub fn violated_cuts(n: usize, edges: &[(NodeId, NodeId, f64)], targets: &[(NodeId, f64)]) -> Vec<ConnectivityCut> {
    let mut out = Vec::new();
    for &(k, demand) in targets {
        if k == DEPOT || demand <= EPS_CUT {
            continue;
        }
        let mut g = FlowNetwork::new(n + 1);
        for &(u, v, c) in edges {
            if c > 0.0 {
                g.add_undirected(u, v, c);
            }
        }
        let (value, source_side) = g.min_cut(DEPOT, k);
        if value < demand - EPS_CUT {
            let set: Vec<NodeId> = (1..=n).filter(|&i| !source_side[i]).collect();
            out.push(ConnectivityCut { target: k, set, value });
        }
    }
    out
}

/// Violated connectivity cuts `x(δ(S)) >= 2` for a point `x` indexed by edge,
/// one per required node whose minimum cut from the depot is below 2.
pub fn separate_connectivity(inst: &Instance, x: &[f64]) -> Vec<ConnectivityCut> {
    let edges: Vec<(NodeId, NodeId, f64)> = inst.edges().iter().zip(x).map(|(e, &v)| (e.u, e.v, v)).collect();
    let targets: Vec<(NodeId, f64)> = inst
        .stsp_required()
        .into_iter()
        .filter(|&k| k != DEPOT)
        .map(|k| (k, 2.0))
        .collect();
    violated_cuts(inst.node_count(), &edges, &targets)
}

/// Right-hand side of a connectivity cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutDemand {
    /// `x(δ(S)) >= c`.
    Constant(f64),
    /// `x(δ(S)) >= c * y`, for a visit variable `y`.
    Scaled(f64, VarId),
}

/// Separation callback over models whose edge use `x_e` is a sum of model
/// variables (one variable for an edge-based model).
pub struct ConnectivitySeparator {
    n: usize,
    /// Per edge: endpoints and the variables summing to `x_e`.
    edges: Vec<(NodeId, NodeId, Vec<VarId>)>,
    targets: Vec<(NodeId, CutDemand)>,
    seen: HashSet<(Vec<NodeId>, Option<VarId>)>,
    count: usize,
}

impl ConnectivitySeparator {
    pub fn new(n: usize, edges: Vec<(NodeId, NodeId, Vec<VarId>)>, targets: Vec<(NodeId, CutDemand)>) -> Self {
        ConnectivitySeparator {
            n,
            edges,
            targets,
            seen: HashSet::new(),
            count: 0,
        }
    }

    /// Number of cuts emitted so far.
    pub fn emitted(&self) -> usize {
        self.count
    }
}

impl Separator for ConnectivitySeparator {
    fn separate(&mut self, x: &[f64]) -> Vec<Constraint> {
        let edges: Vec<(NodeId, NodeId, f64)> = self
            .edges
            .iter()
            .map(|(u, v, vars)| (*u, *v, vars.iter().map(|&j| x[j]).sum::<f64>().max(0.0)))
            .collect();
        let demands: Vec<(NodeId, f64)> = self
            .targets
            .iter()
            .map(|&(k, d)| match d {
                CutDemand::Constant(c) => (k, c),
                CutDemand::Scaled(c, y) => (k, c * x[y]),
            })
            .collect();
        let mut rows = Vec::new();
        for cut in violated_cuts(self.n, &edges, &demands) {
            let demand = self
                .targets
                .iter()
                .find(|t| t.0 == cut.target)
                .map(|t| t.1)
                .expect("cut target comes from the target list");
            let key_var = match demand {
                CutDemand::Constant(_) => None,
                CutDemand::Scaled(_, y) => Some(y),
            };
            if !self.seen.insert((cut.set.clone(), key_var)) {
                continue;
            }
            let mut inside = vec![false; self.n + 1];
            for &i in &cut.set {
                inside[i] = true;
            }
            let mut coeffs = Vec::new();
            for (u, v, vars) in &self.edges {
                if inside[*u] != inside[*v] {
                    coeffs.extend(vars.iter().map(|&j| (j, 1.0)));
                }
            }
            let rhs = match demand {
                CutDemand::Constant(c) => c,
                CutDemand::Scaled(c, y) => {
                    coeffs.push((y, -c));
                    0.0
                }
            };
            self.count += 1;
            rows.push(Constraint::new(format!("cut_{}", self.count), coeffs, Sense::Ge, rhs));
        }
        rows
    }
}
