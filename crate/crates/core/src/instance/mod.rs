//! Sparse Steiner TSP instances.
//!
//! Nodes are labelled `1..=n` and node 1 is the depot. Every per-node table
//! in this crate is indexed by label, so slot 0 is unused.

mod arcs;
pub mod generate;
mod parse;
mod paths;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use arcs::{Arc, ArcSet};
pub use paths::{Distances, RankVector, TspConversion, Weight};

pub type NodeId = usize;
pub type EdgeId = usize;

pub const DEPOT: NodeId = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Smaller endpoint.
    pub u: NodeId,
    /// Larger endpoint.
    pub v: NodeId,
    pub cost: f64,
    pub time: Option<f64>,
}

impl Edge {
    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, node: NodeId) -> bool {
        self.u == node || self.v == node
    }

    /// Traversal time, falling back to cost when the instance gives none.
    pub fn travel_time(&self) -> f64 {
        self.time.unwrap_or(self.cost)
    }
}

/// A validated instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    node_count: usize,
    edges: Vec<Edge>,
    required: BTreeSet<NodeId>,
    service: BTreeMap<NodeId, f64>,
    windows: BTreeMap<NodeId, (f64, f64)>,
    horizon: Option<f64>,
    revenue: BTreeMap<NodeId, f64>,
    demand: BTreeMap<NodeId, f64>,
    budget: Option<f64>,
    capacity: Option<f64>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    pruned_edges: usize,
}

impl Instance {
    pub fn builder(node_count: usize) -> InstanceBuilder {
        InstanceBuilder::new(node_count)
    }

    pub fn parse(text: &str) -> Result<Instance> {
        parse::parse_instance(text)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        1..=self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge id joining `a` and `b`, if any.
    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.adjacency
            .get(a)?
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, e)| e)
    }

    /// `(neighbour, edge)` pairs in edge order.
    pub fn neighbours(&self, node: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    /// Required nodes exactly as listed in the input.
    pub fn required(&self) -> &BTreeSet<NodeId> {
        &self.required
    }

    pub fn is_required(&self, node: NodeId) -> bool {
        self.required.contains(&node)
    }

    /// Required set for the plain Steiner TSP: the listed nodes plus the depot.
    pub fn stsp_required(&self) -> Vec<NodeId> {
        let mut set = self.required.clone();
        set.insert(DEPOT);
        set.into_iter().collect()
    }

    /// Required nodes other than the depot (the customers of the variants).
    pub fn customers(&self) -> Vec<NodeId> {
        self.required.iter().copied().filter(|&i| i != DEPOT).collect()
    }

    pub fn is_customer(&self, node: NodeId) -> bool {
        node != DEPOT && self.required.contains(&node)
    }

    pub fn service_time(&self, node: NodeId) -> f64 {
        self.service.get(&node).copied().unwrap_or(0.0)
    }

    pub fn window(&self, node: NodeId) -> Option<(f64, f64)> {
        self.windows.get(&node).copied()
    }

    pub fn horizon(&self) -> Option<f64> {
        self.horizon
    }

    pub fn revenue(&self, node: NodeId) -> Option<f64> {
        self.revenue.get(&node).copied()
    }

    pub fn demand(&self, node: NodeId) -> Option<f64> {
        self.demand.get(&node).copied()
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    pub fn capacity(&self) -> Option<f64> {
        self.capacity
    }

    pub fn has_edge_times(&self) -> bool {
        self.edges.iter().all(|e| e.time.is_some())
    }

    /// True when every cost, time and payload is a whole number.
    pub fn is_integral(&self) -> bool {
        let whole = |x: f64| x.fract() == 0.0;
        self.edges
            .iter()
            .all(|e| whole(e.cost) && e.time.map_or(true, whole))
            && self.service.values().all(|&x| whole(x))
            && self.windows.values().all(|&(a, b)| whole(a) && whole(b))
            && self.revenue.values().all(|&x| whole(x))
            && self.demand.values().all(|&x| whole(x))
            && self.horizon.map_or(true, whole)
            && self.budget.map_or(true, whole)
            && self.capacity.map_or(true, whole)
    }

    /// Number of edges dropped because they were not connected to the depot.
    pub fn pruned_edges(&self) -> usize {
        self.pruned_edges
    }

    pub fn arcs(&self) -> ArcSet {
        ArcSet::new(self)
    }

    pub fn shortest_paths(&self, source: NodeId, weight: Weight) -> Distances {
        paths::shortest_paths(self, source, weight)
    }

    pub fn compute_ranks(&self) -> Result<RankVector> {
        paths::compute_ranks(self)
    }

    pub fn convert_to_tsp(&self) -> TspConversion {
        paths::convert_to_tsp(self)
    }

    /// Sum of `cost * uses` over all edges.
    pub fn walk_cost(&self, edge_uses: &[u32]) -> f64 {
        self.edges
            .iter()
            .zip(edge_uses)
            .map(|(e, &k)| e.cost * k as f64)
            .sum()
    }

    /// Canonical text form; `parse(to_text())` reproduces the instance.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nodes {}", self.node_count);
        if !self.required.is_empty() {
            let list: Vec<String> = self.required.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "required {}", list.join(" "));
        }
        for e in &self.edges {
            match e.time {
                Some(t) => {
                    let _ = writeln!(out, "edge {} {} {} {}", e.u, e.v, fmt_num(e.cost), fmt_num(t));
                }
                None => {
                    let _ = writeln!(out, "edge {} {} {}", e.u, e.v, fmt_num(e.cost));
                }
            }
        }
        for (i, s) in &self.service {
            let _ = writeln!(out, "service {} {}", i, fmt_num(*s));
        }
        for (i, (a, b)) in &self.windows {
            let _ = writeln!(out, "window {} {} {}", i, fmt_num(*a), fmt_num(*b));
        }
        if let Some(t) = self.horizon {
            let _ = writeln!(out, "horizon {}", fmt_num(t));
        }
        for (i, p) in &self.revenue {
            let _ = writeln!(out, "revenue {} {}", i, fmt_num(*p));
        }
        for (i, q) in &self.demand {
            let _ = writeln!(out, "demand {} {}", i, fmt_num(*q));
        }
        if let Some(u) = self.budget {
            let _ = writeln!(out, "budget {}", fmt_num(u));
        }
        if let Some(q) = self.capacity {
            let _ = writeln!(out, "capacity {}", fmt_num(q));
        }
        out
    }

    /// Short stable hash of the canonical text.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Copy of this instance with a different required set; payloads are kept.
    pub fn with_required(&self, required: impl IntoIterator<Item = NodeId>) -> Result<Instance> {
        let mut b = self.to_builder();
        b.required = required.into_iter().collect();
        b.build()
    }

    pub fn to_builder(&self) -> InstanceBuilder {
        InstanceBuilder {
            node_count: self.node_count,
            edges: self.edges.clone(),
            required: self.required.clone(),
            service: self.service.clone(),
            windows: self.windows.clone(),
            horizon: self.horizon,
            revenue: self.revenue.clone(),
            demand: self.demand.clone(),
            budget: self.budget,
            capacity: self.capacity,
        }
    }
}

/// Formats whole numbers without a fractional part, everything else with
/// Rust's shortest round-trip representation.
pub(crate) fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Default)]
pub struct InstanceBuilder {
    node_count: usize,
    edges: Vec<Edge>,
    required: BTreeSet<NodeId>,
    service: BTreeMap<NodeId, f64>,
    windows: BTreeMap<NodeId, (f64, f64)>,
    horizon: Option<f64>,
    revenue: BTreeMap<NodeId, f64>,
    demand: BTreeMap<NodeId, f64>,
    budget: Option<f64>,
    capacity: Option<f64>,
}

impl InstanceBuilder {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            ..Self::default()
        }
    }

    pub fn edge(mut self, u: NodeId, v: NodeId, cost: f64) -> Self {
        self.edges.push(Edge { u, v, cost, time: None });
        self
    }

    pub fn timed_edge(mut self, u: NodeId, v: NodeId, cost: f64, time: f64) -> Self {
        self.edges.push(Edge {
            u,
            v,
            cost,
            time: Some(time),
        });
        self
    }

    pub fn required(mut self, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        self.required.extend(nodes);
        self
    }

    pub fn service(mut self, node: NodeId, s: f64) -> Self {
        self.service.insert(node, s);
        self
    }

    pub fn window(mut self, node: NodeId, a: f64, b: f64) -> Self {
        self.windows.insert(node, (a, b));
        self
    }

    pub fn horizon(mut self, t: f64) -> Self {
        self.horizon = Some(t);
        self
    }

    pub fn revenue(mut self, node: NodeId, p: f64) -> Self {
        self.revenue.insert(node, p);
        self
    }

    pub fn demand(mut self, node: NodeId, q: f64) -> Self {
        self.demand.insert(node, q);
        self
    }

    pub fn budget(mut self, u: f64) -> Self {
        self.budget = Some(u);
        self
    }

    pub fn capacity(mut self, q: f64) -> Self {
        self.capacity = Some(q);
        self
    }

    pub fn build(self) -> Result<Instance> {
        let n = self.node_count;
        if n == 0 {
            return Err(Error::InvalidInstance("node count must be positive".into()));
        }
        let check_node = |i: NodeId, what: &str| -> Result<()> {
            if i == 0 || i > n {
                Err(Error::InvalidInstance(format!("{what} refers to node {i} outside 1..={n}")))
            } else {
                Ok(())
            }
        };
        let check_value = |x: f64, what: &str| -> Result<()> {
            if !x.is_finite() {
                Err(Error::InvalidInstance(format!("{what} is not finite")))
            } else if x < 0.0 {
                Err(Error::InvalidInstance(format!("negative weight: {what} = {x}")))
            } else {
                Ok(())
            }
        };

        let mut seen = BTreeSet::new();
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            check_node(e.u, "edge")?;
            check_node(e.v, "edge")?;
            if e.u == e.v {
                return Err(Error::InvalidInstance(format!("self-loop at node {}", e.u)));
            }
            let (u, v) = (e.u.min(e.v), e.u.max(e.v));
            if !seen.insert((u, v)) {
                return Err(Error::InvalidInstance(format!("parallel edge {{{u},{v}}}")));
            }
            check_value(e.cost, &format!("cost of edge {{{u},{v}}}"))?;
            if let Some(t) = e.time {
                check_value(t, &format!("time of edge {{{u},{v}}}"))?;
            }
            edges.push(Edge {
                u,
                v,
                cost: e.cost,
                time: e.time,
            });
        }
        for &i in &self.required {
            check_node(i, "required")?;
        }
        for (&i, &s) in &self.service {
            check_node(i, "service")?;
            check_value(s, &format!("service time of node {i}"))?;
        }
        if let Some(t) = self.horizon {
            check_value(t, "horizon")?;
        }
        for (&i, &(a, b)) in &self.windows {
            check_node(i, "window")?;
            check_value(a, &format!("window start of node {i}"))?;
            check_value(b, &format!("window end of node {i}"))?;
            if a > b {
                return Err(Error::InvalidInstance(format!(
                    "window violation at node {i}: a = {a} > b = {b}"
                )));
            }
            if let Some(t) = self.horizon {
                if b > t {
                    return Err(Error::InvalidInstance(format!(
                        "window violation at node {i}: b = {b} exceeds horizon {t}"
                    )));
                }
            }
        }
        for (&i, &p) in &self.revenue {
            check_node(i, "revenue")?;
            check_value(p, &format!("revenue of node {i}"))?;
        }
        for (&i, &q) in &self.demand {
            check_node(i, "demand")?;
            check_value(q, &format!("demand of node {i}"))?;
        }
        if let Some(u) = self.budget {
            check_value(u, "budget")?;
        }
        if let Some(q) = self.capacity {
            check_value(q, "capacity")?;
        }

        // Keep only the component of the depot.
        let mut reach = vec![false; n + 1];
        let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n + 1];
        for e in &edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut stack = vec![DEPOT];
        reach[DEPOT] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !reach[j] {
                    reach[j] = true;
                    stack.push(j);
                }
            }
        }
        if let Some(&bad) = self.required.iter().find(|&&i| !reach[i]) {
            return Err(Error::InvalidInstance(format!(
                "disconnected required component: node {bad} is not reachable from the depot"
            )));
        }
        let before = edges.len();
        edges.retain(|e| reach[e.u]);
        let pruned_edges = before - edges.len();
        if pruned_edges > 0 {
            log::warn!("pruned {pruned_edges} edge(s) not connected to the depot");
        }

        let mut adjacency = vec![Vec::new(); n + 1];
        for (id, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }

        Ok(Instance {
            node_count: n,
            edges,
            required: self.required,
            service: self.service,
            windows: self.windows,
            horizon: self.horizon,
            revenue: self.revenue,
            demand: self.demand,
            budget: self.budget,
            capacity: self.capacity,
            adjacency,
            pruned_edges,
        })
    }
}
