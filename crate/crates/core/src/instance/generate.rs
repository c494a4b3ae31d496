//! Deterministic instance generators for test corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, InstanceBuilder, NodeId, DEPOT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RequiredSpec {
    List(Vec<NodeId>),
    /// Grid corners (only meaningful for grids; elsewhere the two path ends).
    Corners,
    All,
    /// `k` random non-depot nodes, plus the depot.
    Random(usize),
}

impl std::str::FromStr for RequiredSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corners" => Ok(RequiredSpec::Corners),
            "all" => Ok(RequiredSpec::All),
            _ if s.starts_with("random:") => s["random:".len()..]
                .parse()
                .map(RequiredSpec::Random)
                .map_err(|_| Error::InvalidArgument(format!("bad required spec `{s}`"))),
            _ => s
                .split(',')
                .map(|t| t.trim().parse::<NodeId>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(RequiredSpec::List)
                .map_err(|_| Error::InvalidArgument(format!("bad required spec `{s}`"))),
        }
    }
}

fn resolve_required(spec: &RequiredSpec, n: usize, corners: &[NodeId], rng: &mut ChaCha8Rng) -> Vec<NodeId> {
    match spec {
        RequiredSpec::List(v) => v.clone(),
        RequiredSpec::Corners => corners.to_vec(),
        RequiredSpec::All => (1..=n).collect(),
        RequiredSpec::Random(k) => {
            let mut pool: Vec<NodeId> = (2..=n).collect();
            pool.shuffle(rng);
            let mut out: Vec<NodeId> = pool.into_iter().take(*k).collect();
            out.push(DEPOT);
            out.sort_unstable();
            out
        }
    }
}

/// Path `1 - 2 - ... - n` with unit costs.
pub fn path(n: usize, required: &RequiredSpec) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut b = InstanceBuilder::new(n);
    for i in 1..n {
        b = b.edge(i, i + 1, 1.0);
    }
    b.required(resolve_required(required, n, &[1, n], &mut rng)).build()
}

/// `w x h` grid, row-major labels, integer costs drawn from `1..=9`.
pub fn grid(w: usize, h: usize, required: &RequiredSpec, seed: u64) -> Result<Instance> {
    if w == 0 || h == 0 {
        return Err(Error::InvalidArgument("grid dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |r: usize, c: usize| r * w + c + 1;
    let mut b = InstanceBuilder::new(w * h);
    for r in 0..h {
        for c in 0..w {
            if c + 1 < w {
                b = b.edge(id(r, c), id(r, c + 1), rng.gen_range(1..=9) as f64);
            }
            if r + 1 < h {
                b = b.edge(id(r, c), id(r + 1, c), rng.gen_range(1..=9) as f64);
            }
        }
    }
    let mut corners = vec![id(0, 0), id(0, w - 1), id(h - 1, 0), id(h - 1, w - 1)];
    corners.sort_unstable();
    corners.dedup();
    let req = resolve_required(required, w * h, &corners, &mut rng);
    b.required(req).build()
}

type Point = (i64, i64);

fn orient(a: Point, b: Point, c: Point) -> i64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// True when segments `ab` and `cd` meet anywhere other than at a shared
/// endpoint.
fn crosses(a: Point, b: Point, c: Point, d: Point) -> bool {
    let shared = if a == c || a == d {
        Some((a, b, if a == c { d } else { c }))
    } else if b == c || b == d {
        Some((b, a, if b == c { d } else { c }))
    } else {
        None
    };
    if let Some((s, p, q)) = shared {
        // Only a collinear overlap counts.
        let dot = (p.0 - s.0) * (q.0 - s.0) + (p.1 - s.1) * (q.1 - s.1);
        return orient(s, p, q) == 0 && dot > 0;
    }
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1.signum() * o2.signum() < 0 && o3.signum() * o4.signum() < 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

/// Random planar graph: `n` integer points in a 100 x 100 square, Euclidean
/// minimum spanning tree, then the shortest non-crossing chords until `m`
/// edges. Costs are rounded Euclidean lengths (at least 1).
pub fn random_planar(n: usize, m: usize, required: &RequiredSpec, seed: u64) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidArgument("random-planar needs at least 2 nodes".into()));
    }
    if m < n - 1 {
        return Err(Error::InvalidArgument(format!("{m} edges cannot connect {n} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = (rng.gen_range(0..100), rng.gen_range(0..100));
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let len2 = |i: usize, j: usize| {
        let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
        dx * dx + dy * dy
    };
    let mut pairs: Vec<(i64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((len2(i, j), i, j));
        }
    }
    pairs.sort_unstable();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    let mut in_tree = vec![false; pairs.len()];
    for (k, &(_, i, j)) in pairs.iter().enumerate() {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            chosen.push((i, j));
            in_tree[k] = true;
        }
    }
    for (k, &(_, i, j)) in pairs.iter().enumerate() {
        if chosen.len() >= m {
            break;
        }
        if in_tree[k] {
            continue;
        }
        let ok = chosen
            .iter()
            .all(|&(a, b)| !crosses(pts[i], pts[j], pts[a], pts[b]));
        if ok {
            chosen.push((i, j));
        }
    }
    if chosen.len() < m {
        return Err(Error::InvalidArgument(format!(
            "could only place {} non-crossing edges on {n} points",
            chosen.len()
        )));
    }
    let mut b = InstanceBuilder::new(n);
    for (i, j) in chosen {
        let cost = (len2(i, j) as f64).sqrt().round().max(1.0);
        b = b.edge(i + 1, j + 1, cost);
    }
    let req = resolve_required(required, n, &[1, n], &mut rng);
    b.required(req).build()
}

/// Adds revenues, demands, a cost budget and a capacity for the orienteering
/// and profitable-tour variants. The depot is dropped from the required set.
pub fn with_variant_payloads(inst: &Instance, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let customers = inst.customers();
    let mut b = inst.to_builder();
    b.required = customers.iter().copied().collect();
    // Revenues scale with the round trip from the depot, so that serving a
    // customer is sometimes but not always worth its detour.
    let dist = inst.shortest_paths(DEPOT, super::Weight::Cost);
    let mut total_q = 0.0;
    for &i in &customers {
        let q = rng.gen_range(1..=5) as f64;
        total_q += q;
        let trip = 2.0 * dist.get(i).unwrap_or(0.0);
        let top = (1.5 * trip).round().max(1.0) as i64;
        b = b.revenue(i, rng.gen_range(1..=top) as f64).demand(i, q);
    }
    let total_cost: f64 = inst.edges().iter().map(|e| e.cost).sum();
    let frac = rng.gen_range(0.3..0.9);
    b = b.budget((2.0 * total_cost * frac).round());
    let cap = if total_q >= 1.0 {
        rng.gen_range(1..=(total_q as i64)) as f64
    } else {
        0.0
    };
    b.capacity(cap).build()
}
