//! Held–Karp for the converted metric TSP, and the cycle-removal helper
//! behind the traversal bound.

use crate::error::{Error, Result};

/// Largest city count [`held_karp`] accepts.
pub const MAX_HELD_KARP: usize = 16;

/// Optimal tour over a complete cost matrix, as `(cost, order)` with
/// `order[0] = 0`. One city gives cost 0; two cities give the round trip.
pub fn held_karp(cost: &[Vec<f64>]) -> Result<(f64, Vec<usize>)> {
    let n = cost.len();
    if n > MAX_HELD_KARP {
        return Err(Error::SizeGuard(format!("{n} cities exceed the Held-Karp limit of {MAX_HELD_KARP}")));
    }
    if n <= 1 {
        return Ok((0.0, vec![0; n]));
    }
    let m = n - 1;
    let full = 1usize << m;
    // dp[mask][j]: cheapest path from city 0 through `mask` ending at j + 1.
    let mut dp = vec![vec![f64::INFINITY; m]; full];
    let mut from = vec![vec![usize::MAX; m]; full];
    for j in 0..m {
        dp[1 << j][j] = cost[0][j + 1];
    }
    for mask in 1..full {
        for j in 0..m {
            if mask >> j & 1 == 0 || !dp[mask][j].is_finite() {
                continue;
            }
            for k in 0..m {
                if mask >> k & 1 == 1 {
                    continue;
                }
                let next = mask | 1 << k;
                let v = dp[mask][j] + cost[j + 1][k + 1];
                if v < dp[next][k] {
                    dp[next][k] = v;
                    from[next][k] = j;
                }
            }
        }
    }
    let (mut best, mut end) = (f64::INFINITY, usize::MAX);
    for j in 0..m {
        let v = dp[full - 1][j] + cost[j + 1][0];
        if v < best {
            best = v;
            end = j;
        }
    }
    if !best.is_finite() {
        return Err(Error::Infeasible("cost matrix has no finite tour".into()));
    }
    let mut order = Vec::with_capacity(n);
    let mut mask = full - 1;
    let mut j = end;
    while j != usize::MAX {
        order.push(j + 1);
        let prev = from[mask][j];
        mask &= !(1 << j);
        j = prev;
    }
    order.push(0);
    order.reverse();
    Ok((best, order))
}

/// For a connected multigraph on nodes `0..k` with more than `2(k - 1)`
/// edges, returns the indices of a cycle whose removal leaves the graph
/// connected. Follows the spanning-tree argument: every cycle among the
/// non-tree edges qualifies. `None` when the hypothesis fails.
pub fn non_disconnecting_cycle(k: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    if k == 0 || edges.len() <= 2 * (k - 1) {
        return None;
    }
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    let mut in_tree = vec![false; edges.len()];
    for (i, &(u, v)) in edges.iter().enumerate() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            in_tree[i] = true;
        }
    }
    let root = find(&mut parent, 0);
    if (0..k).any(|v| find(&mut parent, v) != root) {
        return None;
    }
    // First non-tree edge closing a cycle among non-tree edges.
    let mut forest: Vec<usize> = (0..k).collect();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    for (i, &(u, v)) in edges.iter().enumerate() {
        if in_tree[i] {
            continue;
        }
        let (a, b) = (find(&mut forest, u), find(&mut forest, v));
        if a == b {
            let mut cycle = forest_path(&adj, u, v)?;
            cycle.push(i);
            return Some(cycle);
        }
        forest[a] = b;
        adj[u].push((v, i));
        adj[v].push((u, i));
    }
    None
}

/// Edge indices of the unique forest path from `s` to `t` (empty for loops).
fn forest_path(adj: &[Vec<(usize, usize)>], s: usize, t: usize) -> Option<Vec<usize>> {
    let mut via = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[s] = true;
    let mut stack = vec![s];
    while let Some(v) = stack.pop() {
        for &(w, e) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                via[w] = Some((v, e));
                stack.push(w);
            }
        }
    }
    if !seen[t] {
        return None;
    }
    let mut path = Vec::new();
    let mut v = t;
    while let Some((p, e)) = via[v] {
        path.push(e);
        v = p;
    }
    Some(path)
}
