//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the lines always print.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stsp_core::analysis::{
    check_mcf_projection, check_theorem1, check_theorem2, lp_optimum, root_bound, sample_lp_points,
};
use stsp_core::bnb::{BnbOptions, MilpStatus};
use stsp_core::formulations::{build, BuildOptions, FormulationTag, Problem};
use stsp_core::instance::Instance;
use stsp_core::lp::{solve_lp, LpStatus};
use stsp_core::milp::{export_mps, parse_mps, MilpModel, ObjSense, Sense};
use stsp_core::oracle::{brute_force_stsp, brute_force_stsp_capped, brute_force_stsptw, brute_force_variant};
use stsp_core::solve::{solve_formulation, solve_instance, SolveOptions};
use support::tableau::{DenseLp, Outcome, Rel};

/// Integer optima are compared to this absolute tolerance.
const EXACT_TOL: f64 = 1e-6;
/// Relative tolerance for the LP chain: `1e-6 * (1 + |value|)`.
const CHAIN_TOL: f64 = 1e-6;
/// Smallest accepted slack in the projection checks.
const SLACK_TOL: f64 = -1e-8;
/// LP oracle agreement tolerance.
const LP_TOL: f64 = 1e-6;
const SUITE_SIZE: usize = 50;
const VARIANT_SUITE_SIZE: usize = 20;
const SAMPLED_POINTS: usize = 10;
const RANDOM_LPS: usize = 100;

type Check = fn(&Context) -> Result<String, String>;

struct Context {
    suite: Vec<(u64, Instance)>,
    variants: Vec<(u64, Instance)>,
}

fn milp_value(inst: &Instance, tag: FormulationTag, opts: BuildOptions) -> Result<f64, String> {
    let f = build(inst, tag, opts).map_err(|e| format!("{tag}: {e}"))?;
    let sol = solve_formulation(&f, &BnbOptions::default()).map_err(|e| format!("{tag}: {e}"))?;
    match (sol.status, sol.objective) {
        (MilpStatus::Optimal, Some(v)) => Ok(v),
        (s, _) => Err(format!("{tag} ended with {s:?}")),
    }
}

fn exact(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXACT_TOL
}

fn criterion1(_: &Context) -> Result<String, String> {
    let inst = support::windows(0.0, 6.0);
    let out = solve_instance(&inst, FormulationTag::Stsptw, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let milp = out.solution.ok_or("STSPTW found no solution")?;
    let oracle = brute_force_stsptw(&inst).map_err(|e| e.to_string())?;
    let e12 = inst.edge_between(1, 2).expect("edge {1,2}");
    for (who, sol) in [("milp", &milp), ("oracle", &oracle)] {
        if sol.cost != 8.0 {
            return Err(format!("{who} cost {}", sol.cost));
        }
        if sol.edge_uses[e12] != 4 {
            return Err(format!("{who} uses edge {{1,2}} {} times", sol.edge_uses[e12]));
        }
        if sol.served != [2, 3, 4] {
            return Err(format!("{who} serves in order {:?}", sol.served));
        }
    }
    Ok(format!("cost 8 both, edge {{1,2}} x4, order 2,3,4, walk {:?}", milp.walk))
}

fn criterion2(ctx: &Context) -> Result<String, String> {
    let mut solves = 0;
    for (seed, inst) in &ctx.suite {
        let truth = brute_force_stsp(inst).map_err(|e| format!("seed {seed}: {e}"))?.cost;
        if truth.fract() != 0.0 {
            return Err(format!("seed {seed}: oracle optimum {truth} is not integral"));
        }
        for &tag in &FormulationTag::STSP {
            let v = milp_value(inst, tag, BuildOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
            if !exact(v, truth) {
                return Err(format!("seed {seed}: {tag} gives {v}, oracle {truth}"));
            }
            solves += 1;
        }
    }
    Ok(format!("{solves} MILP optima equal the oracle on {} instances", ctx.suite.len()))
}

fn criterion3(ctx: &Context) -> Result<String, String> {
    for (seed, inst) in &ctx.suite {
        let free = brute_force_stsp(inst).map_err(|e| e.to_string())?.cost;
        let cap = 2 * (inst.node_count() as u32 - 1);
        let capped = brute_force_stsp_capped(inst, Some(cap))
            .map_err(|e| format!("seed {seed}: capped search failed: {e}"))?
            .cost;
        if capped != free {
            return Err(format!("seed {seed}: cap {cap} raises the optimum {free} to {capped}"));
        }
    }
    Ok(format!("traversal cap 2(|V|-1) never changes the optimum on {} instances", ctx.suite.len()))
}

fn criterion4(ctx: &Context) -> Result<String, String> {
    let le = |a: f64, b: f64| a <= b + CHAIN_TOL * (1.0 + b.abs());
    let lp = |inst: &Instance, tag| -> Result<f64, String> {
        let f = build(inst, tag, BuildOptions::default()).map_err(|e| e.to_string())?;
        root_bound(&f, BnbOptions::default().max_root_rounds)
            .map(|r| r.0)
            .map_err(|e| format!("{tag}: {e}"))
    };
    for (seed, inst) in &ctx.suite {
        let scf = lp(inst, FormulationTag::Scf)?;
        let strong = lp(inst, FormulationTag::ScfStrong)?;
        let cut = lp(inst, FormulationTag::ClassicalCut)?;
        let mcf = lp(inst, FormulationTag::Mcf)?;
        if !(le(scf, strong) && le(scf, cut) && le(cut, mcf)) {
            return Err(format!("seed {seed}: SCF {scf}, SCF_STRONG {strong}, cut {cut}, MCF {mcf}"));
        }
    }
    Ok(format!("LP(SCF) <= LP(SCF_STRONG), LP(SCF) <= cut-LP <= LP(MCF) on {} instances", ctx.suite.len()))
}

fn criterion5(ctx: &Context) -> Result<String, String> {
    let mut points = 0;
    let mut worst = f64::INFINITY;
    for (seed, inst) in &ctx.suite {
        if inst.node_count() > 9 {
            return Err(format!("seed {seed}: more than 9 nodes"));
        }
        for tag in [FormulationTag::Scf, FormulationTag::ScfStrong, FormulationTag::Mcf] {
            let f = build(inst, tag, BuildOptions::default()).map_err(|e| e.to_string())?;
            let (_, opt) = lp_optimum(&f.model).map_err(|e| format!("seed {seed} {tag}: {e}"))?;
            let mut xs = vec![opt];
            xs.extend(sample_lp_points(&f.model, SAMPLED_POINTS, *seed).map_err(|e| e.to_string())?);
            for x in &xs {
                let slack = match tag {
                    FormulationTag::Scf => check_theorem1(inst, &f, x).map(|r| r.min_slack),
                    FormulationTag::ScfStrong => check_theorem2(inst, &f, x).and_then(|r| {
                        if r.cross_gap > 1e-8 {
                            return Ok(-r.cross_gap);
                        }
                        let t1 = check_theorem1(inst, &f, x)?;
                        Ok(r.theorem.min_slack.min(r.corollary.min_slack).min(t1.min_slack))
                    }),
                    _ => check_mcf_projection(inst, &f, x).map(|r| r.min_slack),
                }
                .map_err(|e| format!("seed {seed} {tag}: {e}"))?;
                worst = worst.min(slack);
                if slack < SLACK_TOL {
                    return Err(format!("seed {seed} {tag}: slack {slack}"));
                }
                points += 1;
            }
        }
    }
    Ok(format!("{points} LP points checked, smallest slack {worst:.3e}"))
}

fn criterion6(ctx: &Context) -> Result<String, String> {
    let mut solves = 0;
    let mut positive = [0usize; 2];
    for (seed, inst) in &ctx.variants {
        for problem in [Problem::Sop, Problem::Scptp] {
            let truth = brute_force_variant(inst, problem).map_err(|e| format!("seed {seed}: {e}"))?.objective;
            positive[(problem == Problem::Scptp) as usize] += (truth > 0.0) as usize;
            for &tag in FormulationTag::all_for(problem) {
                let v = milp_value(inst, tag, BuildOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
                if !exact(v, truth) {
                    return Err(format!("seed {seed}: {tag} gives {v}, oracle {truth}"));
                }
                solves += 1;
            }
            let ts = if problem == Problem::Sop { FormulationTag::SopTs } else { FormulationTag::ScptpTs };
            let long = BuildOptions {
                stages: Some(2 * inst.edge_count()),
                ..BuildOptions::default()
            };
            let a = milp_value(inst, ts, long).map_err(|e| format!("seed {seed}: {e}"))?;
            let b = milp_value(inst, ts, BuildOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
            if !exact(a, b) {
                return Err(format!("seed {seed}: {ts} with 2|E| stages gives {a}, with 2(|V|-1) {b}"));
            }
        }
    }
    Ok(format!(
        "{solves} variant optima equal the oracle ({} SOP, {} SCPTP instances with positive optimum); TS stage counts agree",
        positive[0], positive[1]
    ))
}

fn criterion7(_: &Context) -> Result<String, String> {
    let inst = support::windows(0.0, 6.0);
    let bound = 2 * (inst.node_count() as u32 - 1);
    let oracle = brute_force_stsptw(&inst).map_err(|e| e.to_string())?;
    // Unit costs: every optimal walk has exactly `cost` traversals.
    let unit = inst.edges().iter().all(|e| e.cost == 1.0);
    let traversals = oracle.traversals();
    if !unit || traversals as f64 != oracle.cost {
        return Err("instance no longer ties traversals to cost".into());
    }
    if traversals <= bound {
        return Err(format!("optimum uses {traversals} traversals, within {bound}"));
    }
    Ok(format!("optimum needs {traversals} traversals > 2(|V|-1) = {bound}"))
}

fn random_lp(rng: &mut ChaCha8Rng) -> (MilpModel, DenseLp) {
    let n = rng.gen_range(1..=30usize);
    let m = rng.gen_range(1..=30usize);
    let kind = rng.gen_range(0..10);
    let mut lo = vec![0.0; n];
    let mut hi = vec![f64::INFINITY; n];
    for j in 0..n {
        if rng.gen_bool(0.2) {
            lo[j] = -(rng.gen_range(1..=3) as f64);
        }
        if kind < 7 && rng.gen_bool(0.7) {
            hi[j] = lo[j] + rng.gen_range(1..=10) as f64;
        }
    }
    // Anchor point inside the box; rows are made to hold there for most LPs.
    let x0: Vec<f64> = (0..n)
        .map(|j| lo[j] + rng.gen_range(0..=((hi[j] - lo[j]).min(5.0)) as i64) as f64)
        .collect();
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let a: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { rng.gen_range(-5..=5) as f64 } else { 0.0 })
            .collect();
        let ax: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
        let rel = match rng.gen_range(0..6) {
            0..=2 => Rel::Le,
            3..=4 => Rel::Ge,
            _ => Rel::Eq,
        };
        let b = if kind == 9 {
            rng.gen_range(-20..=20) as f64
        } else {
            match rel {
                Rel::Le => ax + rng.gen_range(0..=3) as f64,
                Rel::Ge => ax - rng.gen_range(0..=3) as f64,
                Rel::Eq => ax,
            }
        };
        rows.push((a, rel, b));
    }
    let maximise = rng.gen_bool(0.5);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-10..=10) as f64).collect();

    let mut model = MilpModel::new();
    for j in 0..n {
        model.add_continuous(format!("x{j}"), lo[j], hi[j]).expect("fresh name");
    }
    for (i, (a, rel, b)) in rows.iter().enumerate() {
        let coeffs = a.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect();
        let sense = match rel {
            Rel::Le => Sense::Le,
            Rel::Ge => Sense::Ge,
            Rel::Eq => Sense::Eq,
        };
        model.add_constraint(format!("r{i}"), coeffs, sense, *b).expect("valid row");
    }
    let sense = if maximise { ObjSense::Maximize } else { ObjSense::Minimize };
    model
        .set_objective(sense, c.iter().copied().enumerate().collect())
        .expect("valid objective");
    let dense_c = if maximise { c.iter().map(|v| -v).collect() } else { c };
    (model, DenseLp { c: dense_c, rows, lo, hi })
}

fn criterion8(_: &Context) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tally = [0usize; 3];
    for k in 0..RANDOM_LPS {
        let (model, dense) = random_lp(&mut rng);
        let (sol, _) = solve_lp(&model, None).map_err(|e| format!("lp {k}: {e}"))?;
        let (outcome, value) = dense.solve();
        let expected = match outcome {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => LpStatus::Infeasible,
            Outcome::Unbounded => LpStatus::Unbounded,
        };
        if sol.status != expected {
            return Err(format!("lp {k}: status {:?}, tableau {outcome:?}", sol.status));
        }
        if outcome == Outcome::Optimal {
            let ours = if model.sense() == ObjSense::Maximize { -sol.objective } else { sol.objective };
            if (ours - value).abs() > LP_TOL * (1.0 + value.abs()) {
                return Err(format!("lp {k}: objective {ours} vs tableau {value}"));
            }
            let (viol, row) = model.max_violation(&sol.x);
            if viol > LP_TOL {
                return Err(format!("lp {k}: primal violates {row:?} by {viol}"));
            }
        }
        tally[outcome as usize] += 1;
    }
    Ok(format!(
        "{RANDOM_LPS} LPs agree ({} optimal, {} infeasible, {} unbounded)",
        tally[0], tally[1], tally[2]
    ))
}

fn criterion9(ctx: &Context) -> Result<String, String> {
    let mut models = 0;
    let mut check = |inst: &Instance, tag: FormulationTag| -> Result<(), String> {
        let f = build(inst, tag, BuildOptions::default()).map_err(|e| e.to_string())?;
        let first = export_mps(&f.model);
        let back = parse_mps(&first.text, Some(&first.name_map)).map_err(|e| format!("{tag}: {e}"))?;
        let second = export_mps(&back);
        if first != second {
            return Err(format!("{tag} on {}: second export differs", inst.fingerprint()));
        }
        models += 1;
        Ok(())
    };
    for (_, inst) in &ctx.suite {
        for &tag in &FormulationTag::STSP {
            check(inst, tag)?;
        }
    }
    for (_, inst) in &ctx.variants {
        for &tag in FormulationTag::all_for(Problem::Sop).iter().chain(FormulationTag::all_for(Problem::Scptp)) {
            check(inst, tag)?;
        }
    }
    check(&support::windows(0.0, 6.0), FormulationTag::Stsptw)?;
    Ok(format!("{models} models are export fixed points"))
}

/// The example with unit service times: reported, not asserted.
fn service_time_note() -> String {
    let inst = support::windows(1.0, 6.0);
    let milp = solve_instance(&inst, FormulationTag::Stsptw, &SolveOptions::default())
        .map(|o| format!("{:?}", o.status))
        .unwrap_or_else(|e| e.to_string());
    let oracle = brute_force_stsptw(&inst).map_or_else(|e| e.to_string(), |s| format!("cost {}", s.cost));
    format!("info: same instance with service time 1: MILP {milp}; oracle {oracle}")
}

fn main() {
    let ctx = Context {
        suite: support::stsp_suite(SUITE_SIZE),
        variants: support::variant_suite(VARIANT_SUITE_SIZE),
    };
    let criteria: [(u32, &str, u64, Check); 9] = [
        (1, "time-window example", 10, criterion1),
        (2, "oracle equivalence", 300, criterion2),
        (3, "traversal bound", 60, criterion3),
        (4, "provable LP chain", 300, criterion4),
        (5, "projection theorems", 600, criterion5),
        (6, "variant oracles", 600, criterion6),
        (7, "negative control", 60, criterion7),
        (8, "simplex oracle", 60, criterion8),
        (9, "MPS round trip", 60, criterion9),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| check(&ctx)))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panic".into())));
        let elapsed = started.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let (verdict, detail) = match (&result, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {limit}s limit")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("criterion {id} [{name}]: {verdict} ({:.2}s / {limit}s) {detail}", elapsed.as_secs_f64());
    }
    println!("{}", service_time_note());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
