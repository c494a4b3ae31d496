use super::{EdgeId, Instance, NodeId};

/// A directed copy of an edge. Arc `2e` runs `u -> v` and arc `2e + 1`
/// runs `v -> u`, where `u < v` are the endpoints of edge `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub edge: EdgeId,
    pub cost: f64,
    pub time: f64,
}

#[derive(Debug, Clone)]
pub struct ArcSet {
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
}

impl ArcSet {
    pub fn new(inst: &Instance) -> Self {
        let n = inst.node_count();
        let mut arcs = Vec::with_capacity(2 * inst.edge_count());
        let mut out_arcs = vec![Vec::new(); n + 1];
        let mut in_arcs = vec![Vec::new(); n + 1];
        for (id, e) in inst.edges().iter().enumerate() {
            for (tail, head) in [(e.u, e.v), (e.v, e.u)] {
                let a = arcs.len();
                arcs.push(Arc {
                    tail,
                    head,
                    edge: id,
                    cost: e.cost,
                    time: e.travel_time(),
                });
                out_arcs[tail].push(a);
                in_arcs[head].push(a);
            }
        }
        ArcSet {
            arcs,
            out_arcs,
            in_arcs,
        }
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn get(&self, a: usize) -> &Arc {
        &self.arcs[a]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Arc)> {
        self.arcs.iter().enumerate()
    }

    /// δ⁺(i): arcs leaving `node`.
    pub fn outgoing(&self, node: NodeId) -> &[usize] {
        &self.out_arcs[node]
    }

    /// δ⁻(i): arcs entering `node`.
    pub fn incoming(&self, node: NodeId) -> &[usize] {
        &self.in_arcs[node]
    }

    pub fn edge_of(&self, a: usize) -> EdgeId {
        a / 2
    }

    pub fn arcs_of_edge(&self, e: EdgeId) -> (usize, usize) {
        (2 * e, 2 * e + 1)
    }

    pub fn reverse(&self, a: usize) -> usize {
        a ^ 1
    }
}
