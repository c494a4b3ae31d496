//! Branch-and-bound over the simplex engine: best-bound backtracking,
//! depth-first dives, most-fractional branching and an optional cut callback.

mod maxflow;
mod separation;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Lp, LpSolution, LpStatus, SimplexState};
use crate::milp::{Constraint, MilpModel, ObjSense, EPS_GAP, EPS_INT};

pub use maxflow::FlowNetwork;
pub use separation::{
    separate_connectivity, violated_cuts, ConnectivityCut, ConnectivitySeparator, CutDemand, EPS_CUT,
};

/// Supplies rows violated by an LP point. Every returned row must be valid
/// for all integer-feasible solutions of the model.
pub trait Separator {
    fn separate(&mut self, x: &[f64]) -> Vec<Constraint>;
}

#[derive(Debug, Clone)]
pub struct BnbOptions {
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    /// Safety cap on separation rounds at the root.
    pub max_root_rounds: usize,
    /// Separation rounds at a non-root node whose LP is near the incumbent.
    pub node_cut_rounds: usize,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            node_limit: None,
            time_limit: None,
            max_root_rounds: 10_000,
            node_cut_rounds: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Best integer point found.
    pub x: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Best proven bound in the model's sense.
    pub bound: f64,
    /// LP value at the root after its separation rounds.
    pub root_bound: Option<f64>,
    /// Global bound each time a node was taken from the open list.
    pub bound_history: Vec<f64>,
    pub nodes: usize,
    pub cuts_added: usize,
    pub lp_iterations: usize,
}

#[derive(Debug, Clone)]
struct Node {
    changes: Vec<(usize, f64, f64)>,
    /// Parent LP value, internal minimisation sense.
    bound: f64,
    depth: usize,
    state: Option<SimplexState>,
    id: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap order: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn objective_is_integral(model: &MilpModel) -> bool {
    model
        .objective()
        .iter()
        .all(|&(j, c)| model.variable(j).kind.is_integer() && c == c.round())
}

/// Most fractional integer variable, ties to the lowest index.
fn branching_variable(model: &MilpModel, x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in model.variables().iter().enumerate() {
        if !v.kind.is_integer() {
            continue;
        }
        let f = x[j] - x[j].floor();
        if f <= EPS_INT || f >= 1.0 - EPS_INT {
            continue;
        }
        let score = (f - 0.5).abs();
        if best.map_or(true, |(_, s)| score < s - 1e-12) {
            best = Some((j, score));
        }
    }
    best.map(|(j, _)| j)
}

struct Search {
    integral_obj: bool,
    incumbent: Option<(f64, Vec<f64>)>,
}

impl Search {
    /// True when a node with internal bound `b` cannot improve the incumbent.
    fn prunable(&self, b: f64) -> bool {
        match &self.incumbent {
            None => false,
            Some((inc, _)) => {
                let b = if self.integral_obj { (b - 1e-6).ceil() } else { b };
                b >= inc - EPS_GAP
            }
        }
    }

    fn near_incumbent(&self, b: f64) -> bool {
        match &self.incumbent {
            None => true,
            Some((inc, _)) => inc - b <= 0.1 * inc.abs(),
        }
    }
}

/// Solves `model` to optimality or until a budget runs out.
pub fn solve_milp(model: &MilpModel, mut sep: Option<&mut dyn Separator>, opts: &BnbOptions) -> Result<MilpSolution> {
    let start = Instant::now();
    let sign = if model.sense() == ObjSense::Maximize { -1.0 } else { 1.0 };
    let mut lp = Lp::new(model);
    let root_bounds: Vec<(f64, f64)> = model
        .variables()
        .iter()
        .map(|v| {
            if v.kind.is_integer() {
                ((v.lower - EPS_INT).ceil(), (v.upper + EPS_INT).floor())
            } else {
                (v.lower, v.upper)
            }
        })
        .collect();
    let mut search = Search {
        integral_obj: objective_is_integral(model),
        incumbent: None,
    };
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut next_id = 1;
    let mut current = Some(Node {
        changes: Vec::new(),
        bound: f64::NEG_INFINITY,
        depth: 0,
        state: None,
        id: 0,
    });
    let mut nodes = 0usize;
    let mut cuts_added = 0usize;
    let mut lp_iterations = 0usize;
    let mut root_bound = None;
    let mut history = Vec::new();
    let mut running = f64::NEG_INFINITY;
    let mut exhausted: Option<Node> = None;

    loop {
        let node = match current.take() {
            Some(nd) => nd,
            None => match heap.pop() {
                Some(nd) => {
                    running = running.max(nd.bound);
                    history.push(sign * running);
                    nd
                }
                None => break,
            },
        };
        if search.prunable(node.bound) {
            continue;
        }
        let over_nodes = opts.node_limit.is_some_and(|l| nodes >= l);
        let over_time = opts.time_limit.is_some_and(|t| start.elapsed() >= t);
        if over_nodes || over_time {
            exhausted = Some(node);
            break;
        }
        nodes += 1;
        let is_root = node.id == 0;

        for (j, &(l, u)) in root_bounds.iter().enumerate() {
            lp.set_bounds(j, l, u);
        }
        for &(j, l, u) in &node.changes {
            lp.set_bounds(j, l, u);
        }
        lp.set_state(node.state.clone());

        let mut rounds = 0;
        let sol: LpSolution = loop {
            let sol = lp.solve()?;
            lp_iterations += sol.iterations;
            if sol.status != LpStatus::Optimal {
                break sol;
            }
            let Some(s) = sep.as_deref_mut() else { break sol };
            let val = sign * sol.objective;
            let integral = branching_variable(model, &sol.x).is_none();
            let allowed = integral
                || (is_root && rounds < opts.max_root_rounds)
                || (!is_root && rounds < opts.node_cut_rounds && search.near_incumbent(val) && !search.prunable(val));
            if !allowed {
                break sol;
            }
            let rows = s.separate(&sol.x);
            if rows.is_empty() {
                break sol;
            }
            cuts_added += rows.len();
            lp.add_rows(&rows);
            rounds += 1;
        };

        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Ok(MilpSolution {
                    status: MilpStatus::Unbounded,
                    x: None,
                    objective: None,
                    bound: sign * f64::NEG_INFINITY,
                    root_bound: None,
                    bound_history: history,
                    nodes,
                    cuts_added,
                    lp_iterations,
                })
            }
            LpStatus::IterationLimit => {
                return Err(Error::Solver(format!("simplex iteration limit at node {nodes}")));
            }
        }
        let val = sign * sol.objective;
        if is_root {
            root_bound = Some(sol.objective);
        }
        if search.prunable(val) {
            continue;
        }
        match branching_variable(model, &sol.x) {
            None => {
                let mut x = sol.x;
                for (j, v) in model.variables().iter().enumerate() {
                    if v.kind.is_integer() {
                        x[j] = x[j].round();
                    }
                }
                let obj = sign * model.objective_value(&x);
                if search.incumbent.as_ref().map_or(true, |(inc, _)| obj < inc - 1e-12) {
                    log::debug!("incumbent {} at node {nodes}", sign * obj);
                    search.incumbent = Some((obj, x));
                }
            }
            Some(j) => {
                let v = sol.x[j];
                let (l, u) = lp.bounds(j);
                let state = lp.state().cloned();
                let mut down = node.changes.clone();
                down.push((j, l, v.floor()));
                let mut up = node.changes;
                up.push((j, v.ceil(), u));
                let mk = |changes, id| Node {
                    changes,
                    bound: val,
                    depth: node.depth + 1,
                    state: state.clone(),
                    id,
                };
                let (first, second) = if v - v.floor() >= 0.5 { (up, down) } else { (down, up) };
                heap.push(mk(second, next_id + 1));
                current = Some(mk(first, next_id));
                next_id += 2;
            }
        }
    }

    let inc = search.incumbent.take();
    let (status, bound) = match exhausted {
        Some(nd) => {
            let open = heap.iter().map(|h| h.bound).fold(nd.bound, f64::min);
            let b = match &inc {
                Some((v, _)) => open.min(*v),
                None => open,
            };
            (MilpStatus::BudgetExhausted, sign * b.max(running))
        }
        None => match &inc {
            Some((v, _)) => (MilpStatus::Optimal, sign * v),
            None => (MilpStatus::Infeasible, sign * f64::INFINITY),
        },
    };
    Ok(MilpSolution {
        status,
        objective: inc.as_ref().map(|(v, _)| sign * v),
        x: inc.map(|(_, x)| x),
        bound,
        root_bound,
        bound_history: history,
        nodes,
        cuts_added,
        lp_iterations,
    })
}

/// LP relaxation with separation run to a fixpoint (no branching). Returns
/// the final LP and the rows that were added.
pub fn solve_root_with_cuts(model: &MilpModel, sep: &mut dyn Separator, max_rounds: usize) -> Result<(LpSolution, Vec<Constraint>)> {
    let mut lp = Lp::new(model);
    let mut added = Vec::new();
    for _ in 0..=max_rounds {
        let sol = lp.solve()?;
        if sol.status != LpStatus::Optimal {
            return Ok((sol, added));
        }
        let rows = sep.separate(&sol.x);
        if rows.is_empty() {
            return Ok((sol, added));
        }
        lp.add_rows(&rows);
        added.extend(rows);
    }
    Err(Error::Solver(format!("separation did not settle within {max_rounds} rounds")))
}
