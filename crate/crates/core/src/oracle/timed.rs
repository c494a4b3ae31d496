//! Label search over timed walks for the time-window problem.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::{ScheduleStep, WalkSolution, MAX_TIMED_TRAVERSALS};
use crate::error::{Error, Result};
use crate::instance::{Instance, NodeId, Weight, DEPOT};

const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Label {
    node: NodeId,
    served: u32,
    /// Time the walk is ready to leave `node`.
    clock: f64,
    cost: f64,
    steps: u32,
    parent: Option<usize>,
    /// Service started here on arrival, if any.
    service: Option<f64>,
    arrival: f64,
}

#[derive(Debug, PartialEq)]
struct Entry {
    cost: f64,
    steps: u32,
    clock: f64,
    id: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        // Min-heap on (cost, steps, clock, creation order).
        o.cost
            .total_cmp(&self.cost)
            .then(o.steps.cmp(&self.steps))
            .then(o.clock.total_cmp(&self.clock))
            .then(o.id.cmp(&self.id))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Cheapest closed walk serving every customer inside its window, with at
/// most `(n_R + 1)(|V| - 1)` traversals. Labels are expanded in cost order
/// and pruned by Pareto dominance on (cost, clock, traversals) per
/// (node, served set).
pub fn brute_force_stsptw(inst: &Instance) -> Result<WalkSolution> {
    let horizon = inst
        .horizon()
        .ok_or_else(|| Error::MissingPayload("horizon (HORIZON) is required".into()))?;
    let customers = inst.customers();
    let budget = (customers.len() + 1) * inst.node_count().saturating_sub(1);
    if budget > MAX_TIMED_TRAVERSALS {
        return Err(Error::SizeGuard(format!(
            "traversal budget {budget} exceeds the oracle limit of {MAX_TIMED_TRAVERSALS}"
        )));
    }
    let bit = |i: NodeId| customers.iter().position(|&c| c == i);
    let full = (1u32 << customers.len()) - 1;
    let back = inst.shortest_paths(DEPOT, Weight::Time);

    let mut labels = vec![Label {
        node: DEPOT,
        served: 0,
        clock: 0.0,
        cost: 0.0,
        steps: 0,
        parent: None,
        service: None,
        arrival: 0.0,
    }];
    let mut front: HashMap<(NodeId, u32), Vec<usize>> = HashMap::new();
    front.insert((DEPOT, 0), vec![0]);
    let mut heap = BinaryHeap::from([Entry {
        cost: 0.0,
        steps: 0,
        clock: 0.0,
        id: 0,
    }]);

    let dominated = |labels: &[Label], ids: &[usize], l: &Label| {
        ids.iter().any(|&j| {
            let o = &labels[j];
            o.cost <= l.cost + TIME_TOL && o.clock <= l.clock + TIME_TOL && o.steps <= l.steps
        })
    };

    while let Some(Entry { id, .. }) = heap.pop() {
        let cur = labels[id].clone();
        if cur.node == DEPOT && cur.served == full {
            return Ok(assemble(inst, &labels, id));
        }
        if cur.steps as usize >= budget {
            continue;
        }
        for &(w, e) in inst.neighbours(cur.node) {
            let edge = inst.edge(e);
            let arrival = cur.clock + edge.travel_time();
            // The walk must still make it home in time.
            if arrival + back.get(w).unwrap_or(f64::INFINITY) > horizon + TIME_TOL {
                continue;
            }
            let pass = Label {
                node: w,
                served: cur.served,
                clock: arrival,
                cost: cur.cost + edge.cost,
                steps: cur.steps + 1,
                parent: Some(id),
                service: None,
                arrival,
            };
            let mut next = vec![pass];
            if let Some(b) = bit(w).filter(|&b| cur.served >> b & 1 == 0) {
                let (a, close) = inst.window(w).unwrap_or((0.0, horizon));
                if arrival <= close + TIME_TOL {
                    let start = arrival.max(a);
                    let ready = start + inst.service_time(w);
                    if ready + back.get(w).unwrap_or(f64::INFINITY) <= horizon + TIME_TOL {
                        next.push(Label {
                            served: cur.served | 1 << b,
                            clock: ready,
                            service: Some(start),
                            ..next[0].clone()
                        });
                    }
                }
            }
            for l in next {
                let ids = front.entry((l.node, l.served)).or_default();
                if dominated(&labels, ids, &l) {
                    continue;
                }
                ids.retain(|&j| {
                    let o = &labels[j];
                    !(l.cost <= o.cost && l.clock <= o.clock && l.steps <= o.steps)
                });
                let nid = labels.len();
                ids.push(nid);
                heap.push(Entry {
                    cost: l.cost,
                    steps: l.steps,
                    clock: l.clock,
                    id: nid,
                });
                labels.push(l);
            }
        }
    }
    Err(Error::Infeasible("no timed walk meets every window".into()))
}

fn assemble(inst: &Instance, labels: &[Label], last: usize) -> WalkSolution {
    let mut chain = Vec::new();
    let mut cur = Some(last);
    while let Some(id) = cur {
        chain.push(id);
        cur = labels[id].parent;
    }
    chain.reverse();
    let mut edge_uses = vec![0u32; inst.edge_count()];
    let mut walk = Vec::with_capacity(chain.len());
    let mut schedule = Vec::with_capacity(chain.len());
    let mut served = Vec::new();
    for (p, &id) in chain.iter().enumerate() {
        let l = &labels[id];
        if p > 0 {
            let e = inst.edge_between(walk[p - 1], l.node).expect("labels follow edges");
            edge_uses[e] += 1;
        }
        if l.service.is_some() {
            served.push(l.node);
        }
        walk.push(l.node);
        schedule.push(ScheduleStep {
            node: l.node,
            arrival: l.arrival,
            service_start: l.service,
            departure: l.clock,
        });
    }
    WalkSolution {
        cost: labels[last].cost,
        edge_uses,
        walk,
        served,
        schedule: Some(schedule),
    }
}
