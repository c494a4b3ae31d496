//! Bounded-variable primal simplex over `A x - r = 0`, where each row
//! activity `r_i` carries the bounds implied by the row sense.
//!
//! Phase 1 minimises the sum of bound infeasibilities of the basic variables
//! (a composite method), so any basis can serve as a warm start: after rows
//! are appended or bounds are tightened the previous basis is simply resumed.

mod lu;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::{Constraint, MilpModel, ObjSense, Sense, EPS_FEAS, EPS_OPT};
use lu::BasisFactor;

const REFACTOR_EVERY: usize = 100;
const BLAND_AFTER: usize = 1000;
const ALPHA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

/// Basis and nonbasic positions; reusable as a warm start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexState {
    basis: Vec<usize>,
    status: Vec<VarStatus>,
}

impl SimplexState {
    pub fn rows(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective in the model's own sense.
    pub objective: f64,
    /// Structural values.
    pub x: Vec<f64>,
    /// Row duals in the model's own sense (`d obj / d rhs`).
    pub duals: Vec<f64>,
    /// Structural reduced costs in the model's own sense.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

/// An LP relaxation that can be re-solved after row additions and bound
/// changes, warm-starting from the last basis.
#[derive(Debug, Clone)]
pub struct Lp {
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    m: usize,
    /// Internal minimisation costs of the structurals.
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    maximize: bool,
    state: Option<SimplexState>,
    pub max_iterations: usize,
}

fn row_bounds(sense: Sense, rhs: f64) -> (f64, f64) {
    match sense {
        Sense::Le => (f64::NEG_INFINITY, rhs),
        Sense::Ge => (rhs, f64::INFINITY),
        Sense::Eq => (rhs, rhs),
    }
}

fn resting_status(l: f64, u: f64) -> VarStatus {
    if l.is_finite() {
        VarStatus::AtLower
    } else if u.is_finite() {
        VarStatus::AtUpper
    } else {
        VarStatus::Free
    }
}

impl Lp {
    /// LP relaxation of `model` (integrality dropped).
    pub fn new(model: &MilpModel) -> Self {
        let n = model.variables().len();
        let mut lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
        let maximize = model.sense() == ObjSense::Maximize;
        let mut cost = vec![0.0; n];
        for &(j, c) in model.objective() {
            cost[j] = if maximize { -c } else { c };
        }
        let mut lp = Lp {
            n,
            cols: vec![Vec::new(); n],
            m: 0,
            cost,
            lower: Vec::new(),
            upper: Vec::new(),
            maximize,
            state: None,
            max_iterations: 0,
        };
        lp.lower.append(&mut lower);
        lp.upper.append(&mut upper);
        for c in model.constraints() {
            lp.push_row(c);
        }
        lp.max_iterations = 20_000 + 50 * (lp.n + lp.m);
        lp
    }

    fn push_row(&mut self, c: &Constraint) {
        let i = self.m;
        for &(j, a) in &c.coeffs {
            self.cols[j].push((i, a));
        }
        let (l, u) = row_bounds(c.sense, c.rhs);
        self.lower.push(l);
        self.upper.push(u);
        self.m += 1;
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    /// Appends rows; a stored basis is extended with their activities basic.
    pub fn add_rows(&mut self, rows: &[Constraint]) {
        for c in rows {
            let logical = self.n + self.m;
            self.push_row(c);
            if let Some(st) = &mut self.state {
                st.status.push(VarStatus::Basic);
                st.basis.push(logical);
            }
        }
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        assert!(j < self.n, "only structural bounds can change");
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn state(&self) -> Option<&SimplexState> {
        self.state.as_ref()
    }

    /// Installs a warm start. States with fewer rows are extended with the
    /// missing row activities basic; incompatible states are ignored.
    pub fn set_state(&mut self, state: Option<SimplexState>) {
        self.state = state.and_then(|mut st| {
            if st.basis.len() > self.m || st.status.len() != self.n + st.basis.len() {
                return None;
            }
            while st.basis.len() < self.m {
                let logical = self.n + st.basis.len();
                st.status.push(VarStatus::Basic);
                st.basis.push(logical);
            }
            Some(st)
        });
    }

    fn column(&self, j: usize) -> ColumnRef<'_> {
        if j < self.n {
            ColumnRef::Struct(&self.cols[j])
        } else {
            ColumnRef::Logical(j - self.n)
        }
    }

    fn slack_state(&self) -> SimplexState {
        let mut status: Vec<VarStatus> = (0..self.n)
            .map(|j| resting_status(self.lower[j], self.upper[j]))
            .collect();
        status.extend(std::iter::repeat(VarStatus::Basic).take(self.m));
        SimplexState {
            basis: (self.n..self.n + self.m).collect(),
            status,
        }
    }

    /// Solves from the stored basis (or the slack basis).
    pub fn solve(&mut self) -> Result<LpSolution> {
        let state = match self.state.take() {
            Some(s) => s,
            None => self.slack_state(),
        };
        let mut run = Run::new(self, state);
        let status = run.optimise()?;
        let sol = run.solution(status);
        self.state = Some(run.into_state());
        Ok(sol)
    }
}

enum ColumnRef<'a> {
    Struct(&'a [(usize, f64)]),
    Logical(usize),
}

impl ColumnRef<'_> {
    fn dot(&self, y: &[f64]) -> f64 {
        match self {
            ColumnRef::Struct(c) => c.iter().map(|&(i, a)| a * y[i]).sum(),
            ColumnRef::Logical(i) => -y[*i],
        }
    }

    fn dense(&self, m: usize) -> Vec<f64> {
        let mut v = vec![0.0; m];
        match self {
            ColumnRef::Struct(c) => {
                for &(i, a) in c.iter() {
                    v[i] += a;
                }
            }
            ColumnRef::Logical(i) => v[*i] = -1.0,
        }
        v
    }
}

struct Run<'a> {
    lp: &'a Lp,
    basis: Vec<usize>,
    status: Vec<VarStatus>,
    x: Vec<f64>,
    factor: Option<BasisFactor>,
    y: Vec<f64>,
    iterations: usize,
}

#[derive(Clone, Copy)]
enum Leave {
    Flip,
    Row(usize, VarStatus),
}

impl<'a> Run<'a> {
    fn new(lp: &'a Lp, state: SimplexState) -> Self {
        let nt = lp.n + lp.m;
        Run {
            lp,
            basis: state.basis,
            status: state.status,
            x: vec![0.0; nt],
            factor: None,
            y: vec![0.0; lp.m],
            iterations: 0,
        }
    }

    fn into_state(self) -> SimplexState {
        SimplexState {
            basis: self.basis,
            status: self.status,
        }
    }

    /// Places nonbasic variables on bounds consistent with their status.
    fn place_nonbasic(&mut self) {
        for j in 0..self.lp.n + self.lp.m {
            let (l, u) = (self.lp.lower[j], self.lp.upper[j]);
            let st = self.status[j];
            if st == VarStatus::Basic {
                continue;
            }
            let st = match st {
                VarStatus::AtLower if l.is_finite() => VarStatus::AtLower,
                VarStatus::AtUpper if u.is_finite() => VarStatus::AtUpper,
                _ => resting_status(l, u),
            };
            self.status[j] = st;
            self.x[j] = match st {
                VarStatus::AtLower => l,
                VarStatus::AtUpper => u,
                _ => 0.0,
            };
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.lp.m;
        for attempt in 0..=m + 1 {
            let cols: Vec<Vec<(usize, f64)>> = self
                .basis
                .iter()
                .map(|&j| match self.lp.column(j) {
                    ColumnRef::Struct(c) => c.to_vec(),
                    ColumnRef::Logical(i) => vec![(i, -1.0)],
                })
                .collect();
            let refs: Vec<&[(usize, f64)]> = cols.iter().map(|c| c.as_slice()).collect();
            match BasisFactor::factor(m, &refs) {
                Ok(f) => {
                    self.factor = Some(f);
                    self.recompute_basic();
                    return Ok(());
                }
                Err(sing) if attempt < m + 1 => {
                    log::debug!("singular basis, replacing {} column(s)", sing.positions.len());
                    let in_basis: std::collections::HashSet<usize> = self.basis.iter().copied().collect();
                    let mut spare = (0..m).map(|i| self.lp.n + i).filter(|j| !in_basis.contains(j));
                    for (k, &pos) in sing.positions.iter().enumerate() {
                        let want = self.lp.n + sing.rows[k];
                        let repl = if in_basis.contains(&want) {
                            match spare.next() {
                                Some(s) => s,
                                None => break,
                            }
                        } else {
                            want
                        };
                        let old = self.basis[pos];
                        self.status[old] = resting_status(self.lp.lower[old], self.lp.upper[old]);
                        self.basis[pos] = repl;
                        self.status[repl] = VarStatus::Basic;
                    }
                    if attempt + 1 == m + 1 {
                        let fresh = self.lp.slack_state();
                        self.basis = fresh.basis;
                        self.status = fresh.status;
                    }
                    self.place_nonbasic();
                }
                Err(_) => break,
            }
        }
        Err(Error::Solver("could not factor a basis".into()))
    }

    fn recompute_basic(&mut self) {
        let m = self.lp.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.lp.n + m {
            if self.status[j] == VarStatus::Basic || self.x[j] == 0.0 {
                continue;
            }
            match self.lp.column(j) {
                ColumnRef::Struct(c) => {
                    for &(i, a) in c {
                        rhs[i] -= a * self.x[j];
                    }
                }
                ColumnRef::Logical(i) => rhs[i] += self.x[j],
            }
        }
        self.factor.as_ref().expect("factored").ftran(&mut rhs);
        for (p, &b) in self.basis.iter().enumerate() {
            self.x[b] = rhs[p];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        (self.lp.lower[j] - v).max(v - self.lp.upper[j]).max(0.0)
    }

    fn phase_costs(&self) -> (bool, Vec<f64>) {
        let mut cb = vec![0.0; self.lp.m];
        let mut phase1 = false;
        for (p, &b) in self.basis.iter().enumerate() {
            let v = self.x[b];
            if v < self.lp.lower[b] - EPS_FEAS {
                cb[p] = -1.0;
                phase1 = true;
            } else if v > self.lp.upper[b] + EPS_FEAS {
                cb[p] = 1.0;
                phase1 = true;
            }
        }
        if !phase1 {
            for (p, &b) in self.basis.iter().enumerate() {
                cb[p] = if b < self.lp.n { self.lp.cost[b] } else { 0.0 };
            }
        }
        (phase1, cb)
    }

    fn reduced_cost(&self, j: usize, phase1: bool) -> f64 {
        let c = if phase1 || j >= self.lp.n { 0.0 } else { self.lp.cost[j] };
        c - self.lp.column(j).dot(&self.y)
    }

    fn price(&self, phase1: bool, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.lp.n + self.lp.m {
            let st = self.status[j];
            if st == VarStatus::Basic || self.lp.lower[j] == self.lp.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, phase1);
            let eligible = match st {
                VarStatus::AtLower => d < -EPS_OPT,
                VarStatus::AtUpper => d > EPS_OPT,
                VarStatus::Free => d.abs() > EPS_OPT,
                VarStatus::Basic => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                return Some((j, d));
            }
            if best.map_or(true, |(_, bd)| d.abs() > bd.abs()) {
                best = Some((j, d));
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64]) -> Option<(f64, Leave)> {
        let mut best: Option<(f64, usize, Leave)> = None;
        let (lq, uq) = (self.lp.lower[q], self.lp.upper[q]);
        if lq.is_finite() && uq.is_finite() {
            best = Some((uq - lq, usize::MAX, Leave::Flip));
        }
        for (p, &b) in self.basis.iter().enumerate() {
            let rate = -dir * alpha[p];
            if rate.abs() <= ALPHA_TOL {
                continue;
            }
            let (v, l, u) = (self.x[b], self.lp.lower[b], self.lp.upper[b]);
            let hit = if rate < 0.0 {
                if v > u + EPS_FEAS {
                    Some(((v - u) / -rate, VarStatus::AtUpper))
                } else if l.is_finite() && v >= l - EPS_FEAS {
                    Some(((v - l).max(0.0) / -rate, VarStatus::AtLower))
                } else {
                    None
                }
            } else if v < l - EPS_FEAS {
                Some(((l - v) / rate, VarStatus::AtLower))
            } else if u.is_finite() && v <= u + EPS_FEAS {
                Some(((u - v).max(0.0) / rate, VarStatus::AtUpper))
            } else {
                None
            };
            if let Some((t, st)) = hit {
                let better = match best {
                    None => true,
                    Some((bt, bidx, _)) => t < bt - 1e-12 || (t <= bt + 1e-12 && b < bidx && bidx != usize::MAX),
                };
                if better {
                    best = Some((t, b, Leave::Row(p, st)));
                }
            }
        }
        best.map(|(t, _, l)| (t, l))
    }

    fn objective_measure(&self, phase1: bool) -> f64 {
        if phase1 {
            self.basis.iter().map(|&b| self.infeasibility(b)).sum()
        } else {
            (0..self.lp.n).map(|j| self.lp.cost[j] * self.x[j]).sum()
        }
    }

    fn optimise(&mut self) -> Result<LpStatus> {
        self.place_nonbasic();
        if self.lp.m == 0 {
            return self.optimise_unconstrained();
        }
        self.refactor()?;
        let mut bland = false;
        let mut stalled = 0usize;
        let mut last_phase1 = None;
        let mut confirmations = 0;
        loop {
            if self.iterations >= self.lp.max_iterations {
                return Ok(LpStatus::IterationLimit);
            }
            let (phase1, cb) = self.phase_costs();
            if last_phase1 != Some(phase1) {
                bland = false;
                stalled = 0;
                last_phase1 = Some(phase1);
            }
            let mut y = cb;
            self.factor.as_ref().expect("factored").btran(&mut y);
            self.y = y;
            let Some((q, d)) = self.price(phase1, bland) else {
                // Confirm on a fresh factorisation before declaring the end.
                if self.factor.as_ref().map_or(0, |f| f.eta_count()) > 0 && confirmations < 3 {
                    confirmations += 1;
                    self.refactor()?;
                    continue;
                }
                return Ok(if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal });
            };
            let dir = if d < 0.0 { 1.0 } else { -1.0 };
            let mut alpha = self.lp.column(q).dense(self.lp.m);
            self.factor.as_ref().expect("factored").ftran(&mut alpha);
            let before = self.objective_measure(phase1);
            let Some((t, leave)) = self.ratio_test(q, dir, &alpha) else {
                if phase1 {
                    self.refactor()?;
                    self.iterations += 1;
                    continue;
                }
                return Ok(LpStatus::Unbounded);
            };
            self.iterations += 1;
            self.x[q] += dir * t;
            for (p, &b) in self.basis.iter().enumerate() {
                self.x[b] -= dir * t * alpha[p];
            }
            match leave {
                Leave::Flip => {
                    self.status[q] = if dir > 0.0 { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.x[q] = if dir > 0.0 { self.lp.upper[q] } else { self.lp.lower[q] };
                }
                Leave::Row(p, st) => {
                    let out = self.basis[p];
                    self.status[out] = st;
                    self.x[out] = match st {
                        VarStatus::AtLower => self.lp.lower[out],
                        _ => self.lp.upper[out],
                    };
                    self.basis[p] = q;
                    self.status[q] = VarStatus::Basic;
                    let f = self.factor.as_mut().expect("factored");
                    f.update(p, alpha);
                    if f.eta_count() >= REFACTOR_EVERY {
                        self.refactor()?;
                    }
                }
            }
            let after = self.objective_measure(phase1);
            if after < before - 1e-12 * (1.0 + before.abs()) {
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= BLAND_AFTER && !bland {
                    log::debug!("switching to Bland's rule after {stalled} stalled iterations");
                    bland = true;
                }
            }
        }
    }

    /// No rows: every variable sits on its cheapest bound.
    fn optimise_unconstrained(&mut self) -> Result<LpStatus> {
        for j in 0..self.lp.n {
            let (c, l, u) = (self.lp.cost[j], self.lp.lower[j], self.lp.upper[j]);
            let (st, v) = if c > 0.0 {
                (VarStatus::AtLower, l)
            } else if c < 0.0 {
                (VarStatus::AtUpper, u)
            } else {
                let st = resting_status(l, u);
                (st, if st == VarStatus::AtUpper { u } else if l.is_finite() { l } else { 0.0 })
            };
            if !v.is_finite() {
                return Ok(LpStatus::Unbounded);
            }
            self.status[j] = st;
            self.x[j] = v;
        }
        Ok(LpStatus::Optimal)
    }

    fn solution(&self, status: LpStatus) -> LpSolution {
        let sign = if self.lp.maximize { -1.0 } else { 1.0 };
        let x: Vec<f64> = self.x[..self.lp.n].to_vec();
        let internal: f64 = (0..self.lp.n).map(|j| self.lp.cost[j] * x[j]).sum();
        let reduced_costs = (0..self.lp.n).map(|j| sign * self.reduced_cost(j, false)).collect();
        LpSolution {
            status,
            objective: sign * internal,
            x,
            duals: self.y.iter().map(|v| sign * v).collect(),
            reduced_costs,
            iterations: self.iterations,
        }
    }
}

/// Solves the LP relaxation of `model`, optionally from a warm start.
pub fn solve_lp(model: &MilpModel, warm: Option<&SimplexState>) -> Result<(LpSolution, SimplexState)> {
    let mut lp = Lp::new(model);
    lp.set_state(warm.cloned());
    let sol = lp.solve()?;
    Ok((sol, lp.state.expect("solve stores a state")))
}

/// Re-solves after appending `new_rows` to `model`, starting from `state`
/// (a basis of `model` without those rows).
pub fn reoptimize_with_rows(
    model: &MilpModel,
    state: &SimplexState,
    new_rows: &[Constraint],
) -> Result<(LpSolution, SimplexState)> {
    let mut lp = Lp::new(model);
    lp.set_state(Some(state.clone()));
    lp.add_rows(new_rows);
    let sol = lp.solve()?;
    Ok((sol, lp.state.expect("solve stores a state")))
}

/// Lagrangian lower bound (for minimisation; upper bound for maximisation)
/// implied by row multipliers `duals` given in the model's own sense.
/// Returns `-inf`/`+inf` when a free direction makes the bound vacuous.
pub fn lagrangian_bound(model: &MilpModel, duals: &[f64]) -> f64 {
    let max = model.sense() == ObjSense::Maximize;
    let sign = if max { -1.0 } else { 1.0 };
    let n = model.variables().len();
    let mut red = vec![0.0; n];
    for &(j, c) in model.objective() {
        red[j] = sign * c;
    }
    let mut bound = 0.0;
    for (c, &yd) in model.constraints().iter().zip(duals) {
        let mut y = sign * yd;
        // Clip multipliers to the sign the row sense allows.
        match c.sense {
            Sense::Le => y = y.min(0.0),
            Sense::Ge => y = y.max(0.0),
            Sense::Eq => {}
        }
        bound += y * c.rhs;
        for &(j, a) in &c.coeffs {
            red[j] -= y * a;
        }
    }
    for (j, v) in model.variables().iter().enumerate() {
        let d = if red[j].abs() < 1e-9 { 0.0 } else { red[j] };
        if d > 0.0 {
            bound += d * v.lower;
        } else if d < 0.0 {
            bound += d * v.upper;
        }
        if bound.is_nan() {
            bound = f64::NEG_INFINITY;
        }
    }
    sign * bound
}

#[cfg(test)]
mod tests;
