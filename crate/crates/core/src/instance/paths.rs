use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{Instance, NodeId, DEPOT};
use crate::error::{Error, Result};

/// Edge weight used by [`Instance::shortest_paths`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Cost,
    Time,
    /// Entering node `v` costs 1 when `v` is a required node other than the
    /// depot, 0 otherwise.
    RequiredCount,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Single-source distances; `None` marks an unreachable node.
#[derive(Debug, Clone, PartialEq)]
pub struct Distances {
    pub source: NodeId,
    pub dist: Vec<Option<f64>>,
    pred: Vec<Option<NodeId>>,
}

impl Distances {
    pub fn get(&self, node: NodeId) -> Option<f64> {
        self.dist[node]
    }

    /// Node sequence from the source to `target`, inclusive.
    pub fn path_to(&self, target: NodeId) -> Option<Vec<NodeId>> {
        self.dist[target]?;
        let mut path = vec![target];
        let mut cur = target;
        while let Some(p) = self.pred[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

fn weight_of(inst: &Instance, edge: usize, head: NodeId, weight: Weight) -> f64 {
    match weight {
        Weight::Cost => inst.edge(edge).cost,
        Weight::Time => inst.edge(edge).travel_time(),
        Weight::RequiredCount => {
            if inst.is_customer(head) {
                1.0
            } else {
                0.0
            }
        }
    }
}

pub(super) fn shortest_paths(inst: &Instance, source: NodeId, weight: Weight) -> Distances {
    let n = inst.node_count();
    let mut dist: Vec<Option<f64>> = vec![None; n + 1];
    let mut pred = vec![None; n + 1];
    let mut done = vec![false; n + 1];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(0.0);
    heap.push(Reverse((Key(0.0), source)));
    while let Some(Reverse((Key(d), i))) = heap.pop() {
        if done[i] {
            continue;
        }
        done[i] = true;
        for &(j, e) in inst.neighbours(i) {
            if done[j] {
                continue;
            }
            let cand = d + weight_of(inst, e, j, weight);
            if dist[j].map_or(true, |cur| cand < cur) {
                dist[j] = Some(cand);
                pred[j] = Some(i);
                heap.push(Reverse((Key(cand), j)));
            }
        }
    }
    Distances { source, dist, pred }
}

/// `r_i`: the least number of customers a walk from the depot has passed,
/// counting `i` itself, when it first leaves `i`. `r_1 = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVector {
    r: Vec<u32>,
}

impl RankVector {
    pub fn get(&self, node: NodeId) -> u32 {
        self.r[node]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.r
    }
}

pub(super) fn compute_ranks(inst: &Instance) -> Result<RankVector> {
    let d = shortest_paths(inst, DEPOT, Weight::RequiredCount);
    let mut r = vec![0u32; inst.node_count() + 1];
    for i in inst.nodes() {
        match d.get(i) {
            Some(v) => r[i] = v.round() as u32,
            // Isolated stray nodes carry no arcs, so their rank never matters.
            None if inst.degree(i) == 0 && !inst.is_required(i) => r[i] = 0,
            None => {
                return Err(Error::InvalidInstance(format!(
                    "unreachable node {i} has no rank"
                )))
            }
        }
    }
    r[DEPOT] = 0;
    Ok(RankVector { r })
}

/// Complete metric graph over the Steiner-TSP required nodes (depot first).
#[derive(Debug, Clone)]
pub struct TspConversion {
    pub nodes: Vec<NodeId>,
    pub cost: Vec<Vec<f64>>,
    /// `paths[a][b]`: node sequence of a cheapest path realising `cost[a][b]`.
    pub paths: Vec<Vec<Vec<NodeId>>>,
}

impl TspConversion {
    /// Edge-use vector of the closed walk obtained by expanding a tour given
    /// as positions into `nodes`.
    pub fn expand_tour(&self, inst: &Instance, order: &[usize]) -> Vec<u32> {
        let mut uses = vec![0u32; inst.edge_count()];
        if order.len() < 2 {
            return uses;
        }
        for w in 0..order.len() {
            let (a, b) = (order[w], order[(w + 1) % order.len()]);
            for pair in self.paths[a][b].windows(2) {
                let e = inst.edge_between(pair[0], pair[1]).expect("witness path uses graph edges");
                uses[e] += 1;
            }
        }
        uses
    }
}

pub(super) fn convert_to_tsp(inst: &Instance) -> TspConversion {
    let nodes = inst.stsp_required();
    let k = nodes.len();
    let mut cost = vec![vec![0.0; k]; k];
    let mut paths = vec![vec![Vec::new(); k]; k];
    for (a, &s) in nodes.iter().enumerate() {
        let d = shortest_paths(inst, s, Weight::Cost);
        for (b, &t) in nodes.iter().enumerate() {
            cost[a][b] = d.get(t).expect("required nodes are connected");
            paths[a][b] = d.path_to(t).expect("required nodes are connected");
        }
    }
    TspConversion { nodes, cost, paths }
}
