//! Empirical checks of the projection results and bound comparisons
//! between formulations.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bnb::{solve_root_with_cuts, BnbOptions, MilpStatus};
use crate::error::{Error, Result};
use crate::formulations::{build, BuildOptions, Formulation, FormulationTag};
use crate::instance::{Instance, NodeId};
use crate::lp::{Lp, LpStatus};
use crate::milp::{MilpModel, ObjSense, EPS_GAP, EPS_OPT};
use crate::solve::solve_formulation;

/// Largest node count for exhaustive subset checks.
pub const MAX_SUBSET_NODES: usize = 10;
/// Slack below which a projected inequality counts as violated.
pub const PROJECTION_TOL: f64 = 1e-8;
/// Residual allowed when accepting a point as LP-feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Outcome of one family of projected inequalities over all admissible sets.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    pub check: String,
    pub inequalities: usize,
    pub min_slack: f64,
    /// Set attaining the smallest slack.
    pub worst_set: Vec<NodeId>,
}

impl ProjectionReport {
    fn new(check: &str) -> Self {
        ProjectionReport {
            check: check.to_string(),
            inequalities: 0,
            min_slack: f64::INFINITY,
            worst_set: Vec::new(),
        }
    }

    fn record(&mut self, slack: f64, set: &[NodeId]) {
        self.inequalities += 1;
        if slack < self.min_slack {
            self.min_slack = slack;
            self.worst_set = set.to_vec();
        }
    }

    pub fn holds(&self) -> bool {
        self.min_slack >= -PROJECTION_TOL
    }
}

/// Rejects points outside the LP relaxation, naming the worst residual.
pub fn ensure_lp_feasible(model: &MilpModel, x: &[f64]) -> Result<()> {
    if x.len() != model.variables().len() {
        return Err(Error::InvalidArgument("point has the wrong dimension".into()));
    }
    let (viol, who) = model.max_violation(x);
    if viol > FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!(
            "point is not LP-feasible: `{}` violated by {viol:e}",
            who.unwrap_or_default()
        )));
    }
    Ok(())
}

fn expect_tag(f: &Formulation, allowed: &[FormulationTag]) -> Result<()> {
    if allowed.contains(&f.tag) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{} does not fit this check", f.tag)))
    }
}

/// Every `S ⊆ V \ {1}` holding at least one customer, as membership masks.
fn admissible_sets(inst: &Instance) -> Result<Vec<Vec<bool>>> {
    let n = inst.node_count();
    if n > MAX_SUBSET_NODES {
        return Err(Error::SizeGuard(format!(
            "{n} nodes exceed the subset-enumeration limit of {MAX_SUBSET_NODES}"
        )));
    }
    let others: Vec<NodeId> = (2..=n).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << others.len()) {
        let mut inside = vec![false; n + 1];
        for (b, &i) in others.iter().enumerate() {
            inside[i] = mask >> b & 1 == 1;
        }
        if (2..=n).any(|i| inside[i] && inst.is_customer(i)) {
            out.push(inside);
        }
    }
    Ok(out)
}

fn members(inside: &[bool]) -> Vec<NodeId> {
    (1..inside.len()).filter(|&i| inside[i]).collect()
}

fn boundary(inst: &Instance, xe: &[f64], inside: &[bool]) -> f64 {
    inst.edges()
        .iter()
        .zip(xe)
        .filter(|(e, _)| inside[e.u] != inside[e.v])
        .map(|(_, &v)| v)
        .sum()
}

fn customers_in(inst: &Instance, inside: &[bool]) -> f64 {
    (1..inside.len()).filter(|&i| inside[i] && inst.is_customer(i)).count() as f64
}

/// Projection of a single-commodity LP point: `x(δ(S)) >= 2|S ∩ V_R| / (n_R - 1)`.
pub fn check_theorem1(inst: &Instance, f: &Formulation, x: &[f64]) -> Result<ProjectionReport> {
    expect_tag(f, &[FormulationTag::Scf, FormulationTag::ScfStrong])?;
    ensure_lp_feasible(&f.model, x)?;
    let xe = f.project_edges(x);
    let n_r = inst.stsp_required().len() as f64;
    let mut report = ProjectionReport::new("theorem1");
    for inside in admissible_sets(inst)? {
        let rhs = 2.0 * customers_in(inst, &inside) / (n_r - 1.0);
        report.record(boundary(inst, &xe, &inside) - rhs, &members(&inside));
    }
    Ok(report)
}

/// Outcome of [`check_theorem2`].
#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Report {
    /// Every `k` in `[L(S), U(S)]`.
    pub theorem: ProjectionReport,
    /// The `k = L(S)` specialisation divided through by `n_R - L(S) - 1`.
    pub corollary: ProjectionReport,
    /// Largest `|theorem slack at L(S) - (n_R - L(S) - 1) * corollary slack|`;
    /// zero up to rounding when the two forms agree.
    pub cross_gap: f64,
}

impl Theorem2Report {
    pub fn holds(&self) -> bool {
        self.theorem.holds() && self.corollary.holds() && self.cross_gap <= PROJECTION_TOL
    }
}

/// Rank-strengthened projection, for every `k` in `[L(S), U(S)]`, plus the
/// `k = L(S)` corollary.
pub fn check_theorem2(inst: &Instance, f: &Formulation, x: &[f64]) -> Result<Theorem2Report> {
    expect_tag(f, &[FormulationTag::ScfStrong])?;
    ensure_lp_feasible(&f.model, x)?;
    let xe = f.project_edges(x);
    let ranks = inst.compute_ranks()?;
    let n_r = inst.stsp_required().len() as f64;
    let mut thm = ProjectionReport::new("theorem2");
    let mut cor = ProjectionReport::new("theorem2_corollary");
    let mut cross_gap: f64 = 0.0;
    for inside in admissible_sets(inst)? {
        let set = members(&inside);
        // Boundary edges as (outside endpoint rank, x_e).
        let crossing: Vec<(f64, f64)> = inst
            .edges()
            .iter()
            .zip(&xe)
            .filter(|(e, _)| inside[e.u] != inside[e.v])
            .map(|(e, &v)| {
                let out = if inside[e.u] { e.v } else { e.u };
                (ranks.get(out) as f64, v)
            })
            .collect();
        if crossing.is_empty() {
            // Unreachable set: the inequality reads 0 >= 2|S ∩ V_R| and the
            // relaxation is infeasible, so there is nothing to test.
            continue;
        }
        let lo = crossing.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let hi = crossing.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        let cut: f64 = crossing.iter().map(|c| c.1).sum();
        let demand = 2.0 * customers_in(inst, &inside);
        let slack_at = |k: f64| {
            let extra: f64 = crossing.iter().map(|&(r, v)| (k - r).max(0.0) * v).sum();
            (n_r - k - 1.0) * cut + 2.0 * extra - demand
        };
        let mut k = lo;
        while k <= hi + 0.5 {
            thm.record(slack_at(k), &set);
            k += 1.0;
        }
        let denom = n_r - lo - 1.0;
        if denom > 0.0 {
            let c = cut - demand / denom;
            cor.record(c, &set);
            cross_gap = cross_gap.max((slack_at(lo) - denom * c).abs());
        } else {
            // L(S) never exceeds n_R - 1 - |S ∩ V_R|, so this signals a rank bug.
            cor.record(f64::NEG_INFINITY, &set);
        }
    }
    Ok(Theorem2Report {
        theorem: thm,
        corollary: cor,
        cross_gap,
    })
}

/// Multi-commodity projection satisfies every connectivity cut `x(δ(S)) >= 2`.
pub fn check_mcf_projection(inst: &Instance, f: &Formulation, x: &[f64]) -> Result<ProjectionReport> {
    expect_tag(f, &[FormulationTag::Mcf])?;
    ensure_lp_feasible(&f.model, x)?;
    let xe = f.project_edges(x);
    let mut report = ProjectionReport::new("mcf_projection");
    for inside in admissible_sets(inst)? {
        report.record(boundary(inst, &xe, &inside) - 2.0, &members(&inside));
    }
    Ok(report)
}

/// Orienteering single-commodity projection:
/// `U x(δ(S)) >= Σ_{e ∩ S ≠ ∅} c_e x_e`.
pub fn check_sop_projection(inst: &Instance, f: &Formulation, x: &[f64]) -> Result<ProjectionReport> {
    expect_tag(f, &[FormulationTag::SopScf, FormulationTag::SopScfStrong])?;
    ensure_lp_feasible(&f.model, x)?;
    let u = inst
        .budget()
        .ok_or_else(|| Error::MissingPayload("budget is required".into()))?;
    let xe = f.project_edges(x);
    let mut report = ProjectionReport::new("sop_projection");
    for inside in admissible_sets(inst)? {
        let touched: f64 = inst
            .edges()
            .iter()
            .zip(&xe)
            .filter(|(e, _)| inside[e.u] || inside[e.v])
            .map(|(e, &v)| e.cost * v)
            .sum();
        report.record(u * boundary(inst, &xe, &inside) - touched, &members(&inside));
    }
    Ok(report)
}

/// LP relaxation optimum of a model (no separation).
pub fn lp_optimum(model: &MilpModel) -> Result<(f64, Vec<f64>)> {
    let sol = Lp::new(model).solve()?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.x)),
        s => Err(Error::Solver(format!("LP relaxation ended with {s:?}"))),
    }
}

/// `count` LP-feasible points: random convex combinations of vertices
/// reached with random objectives.
pub fn sample_lp_points(model: &MilpModel, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.variables().len();
    let mut vertices = Vec::new();
    for _ in 0..count.clamp(2, 8) {
        let mut probe = model.clone();
        let obj = (0..n).map(|j| (j, rng.gen_range(-1.0..1.0))).collect();
        probe.set_objective(ObjSense::Minimize, obj)?;
        let sol = Lp::new(&probe).solve()?;
        match sol.status {
            LpStatus::Optimal => vertices.push(sol.x),
            // Unbounded directions are skipped; the remaining vertices still span feasible points.
            LpStatus::Unbounded => continue,
            s => return Err(Error::Solver(format!("vertex sampling ended with {s:?}"))),
        }
    }
    if vertices.is_empty() {
        return Err(Error::Solver("no LP vertex found".into()));
    }
    let points = (0..count)
        .map(|_| {
            let w: Vec<f64> = vertices.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            (0..n)
                .map(|j| vertices.iter().zip(&w).map(|(v, wi)| v[j] * wi / total).sum())
                .collect()
        })
        .collect();
    Ok(points)
}

/// Bounds and size of one formulation on one instance.
#[derive(Debug, Clone, Serialize)]
pub struct TagBound {
    pub tag: FormulationTag,
    /// LP relaxation; for cut tags, after separation to a fixpoint.
    pub lp: Option<f64>,
    pub milp: Option<f64>,
    pub status: Option<MilpStatus>,
    pub n_vars: usize,
    pub n_constraints: usize,
    pub n_nonzeros: usize,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub cuts: usize,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Untested,
}

/// One conjecture outcome, written as a JSON line.
#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub conjecture: String,
    pub instance: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub instance: String,
    pub entries: Vec<TagBound>,
    /// Violations of the provable chain; empty when it holds.
    pub chain_violations: Vec<String>,
    pub findings: Vec<Finding>,
}

impl BoundReport {
    pub fn entry(&self, tag: FormulationTag) -> Option<&TagBound> {
        self.entries.iter().find(|e| e.tag == tag)
    }

    pub fn lp(&self, tag: FormulationTag) -> Option<f64> {
        self.entry(tag).and_then(|e| e.lp)
    }
}

fn tol(v: f64) -> f64 {
    EPS_OPT.max(1e-6) * (1.0 + v.abs())
}

/// LP bound of a formulation; cut tags separate to a fixpoint first.
pub fn root_bound(f: &Formulation, max_rounds: usize) -> Result<(f64, usize)> {
    match f.separator() {
        Some(mut sep) => {
            let (sol, cuts) = solve_root_with_cuts(&f.model, &mut sep, max_rounds)?;
            match sol.status {
                LpStatus::Optimal => Ok((sol.objective, cuts.len())),
                s => Err(Error::Solver(format!("cut loop LP ended with {s:?}"))),
            }
        }
        None => Ok((lp_optimum(&f.model)?.0, 0)),
    }
}

/// Solves every tag as LP and MILP, checks the provable chain of LP bounds
/// and records conjecture outcomes without asserting them.
pub fn compare_bounds(inst: &Instance, tags: &[FormulationTag], build_opts: BuildOptions, bnb: &BnbOptions) -> Result<BoundReport> {
    let mut entries = Vec::new();
    for &tag in tags {
        let f = build(inst, tag, build_opts)?;
        let stats = f.model.stats();
        let started = Instant::now();
        let (lp, cuts) = match root_bound(&f, bnb.max_root_rounds) {
            Ok((v, c)) => (Some(v), c),
            Err(e) => {
                log::warn!("{tag}: no LP bound ({e})");
                (None, 0)
            }
        };
        let sol = solve_formulation(&f, bnb)?;
        let milp = (sol.status == MilpStatus::Optimal).then_some(sol.objective).flatten();
        entries.push(TagBound {
            tag,
            lp,
            milp,
            status: Some(sol.status),
            n_vars: stats.n_vars,
            n_constraints: stats.n_constraints,
            n_nonzeros: stats.n_nonzeros,
            nodes: sol.nodes,
            lp_iterations: sol.lp_iterations,
            cuts: cuts.max(sol.cuts_added),
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    let mut report = BoundReport {
        instance: inst.fingerprint(),
        entries,
        chain_violations: Vec::new(),
        findings: Vec::new(),
    };
    report.chain_violations = provable_chain(&report);
    report.findings = conjectures(&report);
    Ok(report)
}

fn provable_chain(r: &BoundReport) -> Vec<String> {
    use FormulationTag::*;
    let mut bad = Vec::new();
    let mut le = |a: FormulationTag, b: FormulationTag| {
        if let (Some(x), Some(y)) = (r.lp(a), r.lp(b)) {
            if x > y + tol(y) {
                bad.push(format!("LP({a}) = {x} exceeds LP({b}) = {y}"));
            }
        }
    };
    le(Scf, ScfStrong);
    le(Scf, ClassicalCut);
    le(ClassicalCut, Mcf);
    let optimal: Vec<(FormulationTag, f64)> = r.entries.iter().filter_map(|e| e.milp.map(|v| (e.tag, v))).collect();
    if let Some(&(t0, v0)) = optimal.first() {
        for &(t, v) in &optimal[1..] {
            if (v - v0).abs() > EPS_GAP * (1.0 + v0.abs()) {
                bad.push(format!("MILP({t}) = {v} differs from MILP({t0}) = {v0}"));
            }
        }
        for e in &r.entries {
            if let Some(lp) = e.lp {
                if e.tag.problem() == t0.problem() && lp > v0 + tol(v0) {
                    bad.push(format!("LP({}) = {lp} exceeds the optimum {v0}", e.tag));
                }
            }
        }
    }
    bad
}

fn conjectures(r: &BoundReport) -> Vec<Finding> {
    use FormulationTag::*;
    let finding = |name: &str, a: FormulationTag, b: FormulationTag, equal: bool| {
        let (lhs, rhs) = (r.lp(a), r.lp(b));
        let verdict = match (lhs, rhs) {
            (Some(x), Some(y)) => {
                let ok = if equal { (x - y).abs() <= tol(y) } else { x <= y + tol(y) };
                if ok {
                    Verdict::Holds
                } else {
                    Verdict::Violated
                }
            }
            _ => Verdict::Untested,
        };
        Finding {
            conjecture: name.to_string(),
            instance: r.instance.clone(),
            lhs,
            rhs,
            verdict,
        }
    };
    vec![
        finding("scf_strong_below_cut", ScfStrong, ClassicalCut, false),
        finding("ts1_above_scf_strong", ScfStrong, Ts1, false),
        finding("ts1_below_cut", Ts1, ClassicalCut, false),
        finding("mcf_equals_cut", Mcf, ClassicalCut, true),
        finding("ts1_equals_ts2", Ts1, Ts2, true),
    ]
}

/// Appends findings as JSON lines.
pub fn append_findings(path: &Path, findings: &[Finding]) -> Result<()> {
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    for f in findings {
        serde_json::to_writer(&mut file, f)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}
