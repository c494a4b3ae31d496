//! Edmonds–Karp maximum flow on a small undirected capacitated graph.

use std::collections::VecDeque;

/// Residual network over nodes `0..n`.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    n: usize,
    head: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

/// Flows below this are treated as zero when searching augmenting paths.
const FLOW_EPS: f64 = 1e-12;

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            n,
            head: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Adds an undirected edge with capacity `c` in each direction.
    pub fn add_undirected(&mut self, u: usize, v: usize, c: f64) {
        self.add_pair(u, v, c, c);
    }

    /// Adds arc `u -> v` with capacity `c` (reverse residual starts at 0).
    pub fn add_arc(&mut self, u: usize, v: usize, c: f64) {
        self.add_pair(u, v, c, 0.0);
    }

    fn add_pair(&mut self, u: usize, v: usize, cu: f64, cv: f64) {
        let id = self.head.len();
        self.head.push(v);
        self.cap.push(cu.max(0.0));
        self.adj[u].push(id);
        self.head.push(u);
        self.cap.push(cv.max(0.0));
        self.adj[v].push(id + 1);
    }

    /// Maximum `s`-`t` flow value and the source side of a minimum cut
    /// (nodes reachable from `s` in the final residual network).
    pub fn min_cut(mut self, s: usize, t: usize) -> (f64, Vec<bool>) {
        let mut total = 0.0;
        loop {
            let mut pred: Vec<Option<usize>> = vec![None; self.n];
            let mut seen = vec![false; self.n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.head[e];
                    if !seen[v] && self.cap[e] > FLOW_EPS {
                        seen[v] = true;
                        pred[v] = Some(e);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return (total, seen);
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = t;
            while let Some(e) = pred[v] {
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.head[e ^ 1];
            }
            let mut v = t;
            while let Some(e) = pred[v] {
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.head[e ^ 1];
            }
            total += bottleneck;
        }
    }
}
