mod support;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stsp_core::analysis::{check_mcf_projection, check_theorem1, check_theorem2, lp_optimum, sample_lp_points};
use stsp_core::bnb::MilpStatus;
use stsp_core::formulations::{build, BuildOptions, FormulationTag};
use stsp_core::instance::generate::{grid, random_planar, RequiredSpec};
use stsp_core::instance::{Instance, NodeId, Weight, DEPOT};
use stsp_core::oracle::{brute_force_stsp, brute_force_stsptw, held_karp, verify_walk};
use stsp_core::solve::{solve_instance, SolveOptions};

/// Cheapest simple path by exhaustive DFS.
fn simple_path_min(inst: &Instance, s: NodeId, t: NodeId) -> Option<f64> {
    fn dfs(inst: &Instance, v: NodeId, t: NodeId, seen: &mut [bool], cost: f64, best: &mut Option<f64>) {
        if v == t {
            *best = Some(best.map_or(cost, |b: f64| b.min(cost)));
            return;
        }
        for &(w, e) in inst.neighbours(v) {
            if !seen[w] {
                seen[w] = true;
                dfs(inst, w, t, seen, cost + inst.edge(e).cost, best);
                seen[w] = false;
            }
        }
    }
    let mut seen = vec![false; inst.node_count() + 1];
    seen[s] = true;
    let mut best = None;
    dfs(inst, s, t, &mut seen, 0.0, &mut best);
    best
}

#[test]
fn shortest_paths_match_simple_path_enumeration() {
    for seed in 0..5 {
        let inst = random_planar(10, 16, &RequiredSpec::All, seed).unwrap();
        let d = inst.shortest_paths(DEPOT, Weight::Cost);
        for t in inst.nodes() {
            assert_eq!(d.get(t), simple_path_min(&inst, DEPOT, t), "seed {seed}, node {t}");
        }
    }
}

#[test]
fn converted_tour_matches_the_oracle() {
    for seed in 0..6 {
        let inst = random_planar(8, 10, &RequiredSpec::Random(3), seed).unwrap();
        assert_eq!(inst.stsp_required().len(), 4);
        let conv = inst.convert_to_tsp();
        let (cost, order) = held_karp(&conv.cost).unwrap();
        let truth = brute_force_stsp(&inst).unwrap().cost;
        assert_eq!(cost, truth, "seed {seed}");
        let uses = conv.expand_tour(&inst, &order);
        assert_eq!(inst.walk_cost(&uses), truth);
    }
}

/// Size ratio between two instances divided by the ratio of the expected
/// order; `1` means the growth matches exactly.
fn growth(small: usize, large: usize, order_small: f64, order_large: f64) -> f64 {
    (large as f64 / small as f64) / (order_large / order_small)
}

#[test]
fn model_sizes_grow_like_their_orders() {
    let a = grid(4, 4, &RequiredSpec::All, 0).unwrap();
    let b = grid(4, 8, &RequiredSpec::All, 0).unwrap();
    let order = |inst: &Instance, tag: FormulationTag| {
        let (v, e, r) = (inst.node_count() as f64, inst.edge_count() as f64, inst.stsp_required().len() as f64);
        match tag {
            FormulationTag::ClassicalCut => (e + v, e + v),
            FormulationTag::Scf | FormulationTag::ScfStrong => (e, e),
            FormulationTag::Mcf => (r * e, r * e),
            FormulationTag::Ts1 => (e * e, e * e),
            FormulationTag::Ts2 => (v * e, v * e),
            _ => unreachable!(),
        }
    };
    for &tag in &FormulationTag::STSP {
        let sa = build(&a, tag, BuildOptions::default()).unwrap().model.stats();
        let sb = build(&b, tag, BuildOptions::default()).unwrap().model.stats();
        let ((va, ca), (vb, cb)) = (order(&a, tag), order(&b, tag));
        let gv = growth(sa.n_vars, sb.n_vars, va, vb);
        let gc = growth(sa.n_constraints, sb.n_constraints, ca, cb);
        for g in [gv, gc] {
            assert!((1.0 / 1.5..=1.5).contains(&g), "{tag}: growth ratio {g} ({sa:?} -> {sb:?})");
        }
    }
    let ts2 = build(&b, FormulationTag::Ts2, BuildOptions::default()).unwrap().model.stats();
    let arcs = 2 * b.edge_count();
    assert!(ts2.n_vars <= 2 * arcs * 2 * (b.node_count() - 1));
    let scf = build(&b, FormulationTag::Scf, BuildOptions::default()).unwrap().model.stats();
    assert_eq!(scf.n_vars, 4 * b.edge_count());
}

/// Small random time-window instance; windows come from a random walk so
/// that many instances are feasible.
fn timed_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=5usize);
    let m = rng.gen_range(n - 1..=(n + 1).min(3 * n - 6).max(n - 1));
    let k = rng.gen_range(1..=3usize.min(n - 1));
    let base = random_planar(n, m, &RequiredSpec::Random(k), seed).unwrap();
    let mut b = Instance::builder(n);
    for e in base.edges() {
        b = b.timed_edge(e.u, e.v, rng.gen_range(1..=4) as f64, rng.gen_range(1..=3) as f64);
    }
    let customers = base.customers();
    b = b.required(customers.iter().copied());
    for &i in &customers {
        let a = rng.gen_range(0..=10) as f64;
        let width = rng.gen_range(0..=6) as f64;
        b = b.window(i, a, a + width).service(i, rng.gen_range(0..=2) as f64);
    }
    b.horizon(24.0).build().unwrap()
}

#[test]
fn time_window_milp_matches_label_search() {
    let (mut feasible, mut infeasible) = (0, 0);
    for seed in 0..200 {
        let inst = timed_instance(seed);
        let oracle = brute_force_stsptw(&inst);
        let out = solve_instance(&inst, FormulationTag::Stsptw, &SolveOptions::default()).unwrap();
        match oracle {
            Ok(o) => {
                assert_eq!(out.status, MilpStatus::Optimal, "seed {seed}: oracle found {}", o.cost);
                let sol = out.solution.unwrap();
                assert!((sol.cost - o.cost).abs() < 1e-6, "seed {seed}: milp {} oracle {}", sol.cost, o.cost);
                let report = verify_walk(&inst, &sol, stsp_core::formulations::Problem::Stsptw);
                assert!(report.passed(), "seed {seed}: {:?}", report.first());
                feasible += 1;
            }
            Err(_) => {
                assert_eq!(out.status, MilpStatus::Infeasible, "seed {seed}");
                infeasible += 1;
            }
        }
    }
    assert!(feasible >= 5 && infeasible >= 1, "{feasible} feasible, {infeasible} infeasible");
}

/// The summed time rows alone get both directions wrong: seed 4 has no
/// feasible schedule yet the literal model finds one, and seed 9 needs a
/// pass through an unserved customer that the literal model forbids.
#[test]
fn literal_time_rows_are_not_exact() {
    let literal = BuildOptions {
        literal_time_rows: true,
        ..BuildOptions::default()
    };
    let milp = |inst: &Instance, opts| {
        let f = build(inst, FormulationTag::Stsptw, opts).unwrap();
        stsp_core::solve::solve_formulation(&f, &Default::default()).unwrap()
    };

    let inst = timed_instance(4);
    assert!(brute_force_stsptw(&inst).is_err());
    assert_eq!(milp(&inst, BuildOptions::default()).status, MilpStatus::Infeasible);
    let loose = milp(&inst, literal);
    assert_eq!(loose.status, MilpStatus::Optimal);
    let f = build(&inst, FormulationTag::Stsptw, literal).unwrap();
    let route = f.stsptw_route(&inst, loose.x.as_ref().unwrap()).unwrap();
    assert!(!route.violations.is_empty());

    let inst = timed_instance(9);
    let truth = brute_force_stsptw(&inst).unwrap().cost;
    assert_eq!(milp(&inst, BuildOptions::default()).objective, Some(truth));
    let strict = milp(&inst, literal).objective.unwrap();
    assert!(strict > truth + 1.0, "literal {strict}, optimum {truth}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn projections_hold_on_sampled_points(seed in 0u64..10_000, n in 4usize..=9, extra in 0usize..4, k in 1usize..4) {
        let m = (n - 1 + extra).min(3 * n - 6);
        let inst = (n - 1..=m).rev()
            .find_map(|m| random_planar(n, m, &RequiredSpec::Random(k.min(n - 1)), seed).ok())
            .unwrap();
        for tag in [FormulationTag::Scf, FormulationTag::ScfStrong, FormulationTag::Mcf] {
            let f = build(&inst, tag, BuildOptions::default()).unwrap();
            let mut pts = sample_lp_points(&f.model, 4, seed).unwrap();
            pts.push(lp_optimum(&f.model).unwrap().1);
            for x in &pts {
                match tag {
                    FormulationTag::Scf => prop_assert!(check_theorem1(&inst, &f, x).unwrap().holds()),
                    FormulationTag::ScfStrong => {
                        let r = check_theorem2(&inst, &f, x).unwrap();
                        prop_assert!(r.holds(), "{:?}", r);
                    }
                    _ => prop_assert!(check_mcf_projection(&inst, &f, x).unwrap().holds()),
                }
            }
        }
    }
}

#[test]
fn integral_optimum_satisfies_every_projection() {
    let inst = support::stsp_suite(3).pop().unwrap().1;
    let out = solve_instance(&inst, FormulationTag::ScfStrong, &SolveOptions::default()).unwrap();
    let f = build(&inst, FormulationTag::ScfStrong, BuildOptions::default()).unwrap();
    let sol = stsp_core::solve::solve_formulation(&f, &Default::default()).unwrap();
    let x = sol.x.unwrap();
    assert_eq!(out.objective, sol.objective);
    assert!(check_theorem1(&inst, &f, &x).unwrap().holds());
    assert!(check_theorem2(&inst, &f, &x).unwrap().holds());
}
