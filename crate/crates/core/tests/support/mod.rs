//! Instance suites and an independent dense simplex shared by the
//! integration targets.

#![allow(dead_code)]

pub mod tableau;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stsp_core::instance::generate::{random_planar, with_variant_payloads, RequiredSpec};
use stsp_core::instance::Instance;

/// Planar instance with up to `m` edges: when the points admit fewer
/// non-crossing edges, `m` drops until they fit.
fn planar(n: usize, m: usize, k: usize, seed: u64) -> Instance {
    (n - 1..=m)
        .rev()
        .find_map(|m| random_planar(n, m, &RequiredSpec::Random(k), seed).ok())
        .expect("a spanning tree always fits")
}

/// Seeded random planar instances with `|V| <= 8`, `|E| <= 11` and integer costs.
pub fn stsp_suite(count: usize) -> Vec<(u64, Instance)> {
    (0..count as u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1_000 + seed);
            let n = rng.gen_range(4..=8usize);
            let m = rng.gen_range(n - 1..=11.min(3 * n - 6));
            let k = rng.gen_range(1..=4.min(n - 1));
            let inst = planar(n, m, k, seed);
            assert!(inst.node_count() <= 8 && inst.edge_count() <= 11 && inst.is_integral());
            (seed, inst)
        })
        .collect()
}

/// Seeded instances with revenues, demands, budget and capacity and
/// at most five customers.
pub fn variant_suite(count: usize) -> Vec<(u64, Instance)> {
    (0..count as u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(2_000 + seed);
            let n = rng.gen_range(4..=7usize);
            let m = rng.gen_range(n - 1..=10.min(3 * n - 6));
            let k = rng.gen_range(2..=5.min(n - 1));
            let base = planar(n, m, k, 500 + seed);
            let inst = with_variant_payloads(&base, seed).expect("payloads");
            assert!(inst.customers().len() <= 5);
            (seed, inst)
        })
        .collect()
}

/// Four-node time-window instance: edges {1,2}, {1,3}, {2,4} with unit cost
/// and time, point windows at 1, 3 and `b4`, service time `s`, horizon 10.
pub fn windows(s: f64, b4: f64) -> Instance {
    Instance::builder(4)
        .timed_edge(1, 2, 1.0, 1.0)
        .timed_edge(1, 3, 1.0, 1.0)
        .timed_edge(2, 4, 1.0, 1.0)
        .required([2, 3, 4])
        .window(2, 1.0, 1.0)
        .window(3, 3.0, 3.0)
        .window(4, b4, b4)
        .service(2, s)
        .service(3, s)
        .service(4, s)
        .horizon(10.0)
        .build()
        .expect("valid instance")
}
