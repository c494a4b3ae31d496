//! Solver-agnostic linear/integer model.

mod mps;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mps::{export_mps, parse_mps, MpsExport};

/// Integrality tolerance.
pub const EPS_INT: f64 = 1e-6;
/// Primal feasibility tolerance.
pub const EPS_FEAS: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const EPS_OPT: f64 = 1e-7;
/// Absolute optimality gap at which branch-and-bound stops.
pub const EPS_GAP: f64 = 1e-6;

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

impl VarKind {
    pub fn is_integer(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Sparse row, sorted by variable, no zeros, no duplicates.
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(name: impl Into<String>, coeffs: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> Self {
        Constraint {
            name: name.into(),
            coeffs: normalize_row(coeffs),
            sense,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

fn normalize_row(mut coeffs: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    coeffs.sort_by_key(|&(j, _)| j);
    let mut out: Vec<(VarId, f64)> = Vec::with_capacity(coeffs.len());
    for (j, a) in coeffs {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|&(_, a)| a != 0.0);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub tag: String,
    pub fingerprint: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStats {
    pub n_vars: usize,
    pub n_constraints: usize,
    pub n_nonzeros: usize,
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
    sense: ObjSense,
    provenance: Provenance,
    var_index: HashMap<String, VarId>,
    con_index: HashMap<String, usize>,
}

impl PartialEq for MilpModel {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables
            && self.constraints == other.constraints
            && self.objective == other.objective
            && self.sense == other.sense
            && self.provenance == other.provenance
    }
}

impl Default for MilpModel {
    fn default() -> Self {
        Self::new()
    }
}

impl MilpModel {
    pub fn new() -> Self {
        MilpModel {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            sense: ObjSense::Minimize,
            provenance: Provenance::default(),
            var_index: HashMap::new(),
            con_index: HashMap::new(),
        }
    }

    pub fn with_provenance(tag: impl Into<String>, fingerprint: impl Into<String>) -> Self {
        let mut m = Self::new();
        m.provenance = Provenance {
            tag: tag.into(),
            fingerprint: fingerprint.into(),
        };
        m
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64, kind: VarKind) -> Result<VarId> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Model(format!("invalid variable name `{name}`")));
        }
        if self.var_index.contains_key(&name) {
            return Err(Error::Model(format!("duplicate variable name `{name}`")));
        }
        if lower.is_nan() || upper.is_nan() || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::Model(format!("bad bounds [{lower}, {upper}] on `{name}`")));
        }
        if lower > upper {
            return Err(Error::Model(format!("empty bounds [{lower}, {upper}] on `{name}`")));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => {
                if lower < 0.0 || upper > 1.0 {
                    return Err(Error::Model(format!("binary `{name}` must have bounds within [0, 1]")));
                }
                (lower, upper)
            }
            _ => (lower, upper),
        };
        let id = self.variables.len();
        self.var_index.insert(name.clone(), id);
        self.variables.push(Variable { name, lower, upper, kind });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId> {
        self.add_variable(name, 0.0, 1.0, VarKind::Binary)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<VarId> {
        self.add_variable(name, lower, upper, VarKind::Continuous)
    }

    pub fn add_integer(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<VarId> {
        self.add_variable(name, lower, upper, VarKind::Integer)
    }

    fn check_row(&self, what: &str, coeffs: &[(VarId, f64)]) -> Result<()> {
        for &(j, a) in coeffs {
            if j >= self.variables.len() {
                return Err(Error::Model(format!("{what} references unknown variable index {j}")));
            }
            if !a.is_finite() {
                return Err(Error::Model(format!("{what} has non-finite coefficient on `{}`", self.variables[j].name)));
            }
        }
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<usize> {
        self.push_constraint(Constraint::new(name, coeffs, sense, rhs))
    }

    pub fn push_constraint(&mut self, c: Constraint) -> Result<usize> {
        if c.name.is_empty() || c.name.chars().any(char::is_whitespace) {
            return Err(Error::Model(format!("invalid constraint name `{}`", c.name)));
        }
        if self.con_index.contains_key(&c.name) {
            return Err(Error::Model(format!("duplicate constraint name `{}`", c.name)));
        }
        self.check_row(&format!("constraint `{}`", c.name), &c.coeffs)?;
        if !c.rhs.is_finite() {
            return Err(Error::Model(format!("constraint `{}` has non-finite rhs", c.name)));
        }
        let id = self.constraints.len();
        self.con_index.insert(c.name.clone(), id);
        self.constraints.push(Constraint {
            coeffs: normalize_row(c.coeffs),
            ..c
        });
        Ok(id)
    }

    pub fn set_objective(&mut self, sense: ObjSense, coeffs: Vec<(VarId, f64)>) -> Result<()> {
        self.check_row("objective", &coeffs)?;
        self.sense = sense;
        self.objective = normalize_row(coeffs);
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id]
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.con_index.get(name).map(|&i| &self.constraints[i])
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn sense(&self) -> ObjSense {
        self.sense
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn set_provenance(&mut self, p: Provenance) {
        self.provenance = p;
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    pub fn stats(&self) -> ModelStats {
        ModelStats {
            n_vars: self.variables.len(),
            n_constraints: self.constraints.len(),
            n_nonzeros: self.constraints.iter().map(|c| c.coeffs.len()).sum(),
        }
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.kind.is_integer())
    }

    /// Largest bound or row violation of `x`, with the name of the offender.
    pub fn max_violation(&self, x: &[f64]) -> (f64, Option<String>) {
        let mut worst = 0.0;
        let mut who = None;
        for (v, &val) in self.variables.iter().zip(x) {
            let viol = (v.lower - val).max(val - v.upper).max(0.0);
            if viol > worst {
                worst = viol;
                who = Some(v.name.clone());
            }
        }
        for c in &self.constraints {
            let viol = c.violation(x);
            if viol > worst {
                worst = viol;
                who = Some(c.name.clone());
            }
        }
        (worst, who)
    }

    /// Largest distance of an integer variable from the nearest integer.
    pub fn max_fractionality(&self, x: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(x)
            .filter(|(v, _)| v.kind.is_integer())
            .map(|(_, &val)| (val - val.round()).abs())
            .fold(0.0, f64::max)
    }

    /// LP relaxation: same rows and bounds, every variable continuous.
    pub fn relaxed(&self) -> MilpModel {
        let mut m = self.clone();
        for v in &mut m.variables {
            v.kind = VarKind::Continuous;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable_model() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
        m.set_objective(ObjSense::Minimize, vec![(x, 1.0)]).unwrap();
        assert_eq!(m.stats(), ModelStats { n_vars: 1, n_constraints: 0, n_nonzeros: 0 });
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut m = MilpModel::new();
        m.add_binary("x").unwrap();
        assert!(m.add_binary("x").is_err());
        m.add_constraint("c", vec![(0, 1.0)], Sense::Le, 1.0).unwrap();
        assert!(m.add_constraint("c", vec![(0, 1.0)], Sense::Le, 1.0).is_err());
    }

    #[test]
    fn bad_index_and_coefficient_rejected() {
        let mut m = MilpModel::new();
        m.add_binary("x").unwrap();
        assert!(m.add_constraint("c", vec![(3, 1.0)], Sense::Le, 1.0).is_err());
        assert!(m.add_constraint("d", vec![(0, f64::NAN)], Sense::Le, 1.0).is_err());
        assert!(m.add_variable("b", 0.0, 2.0, VarKind::Binary).is_err());
    }

    #[test]
    fn rows_are_merged_and_sorted() {
        let mut m = MilpModel::new();
        let x = m.add_binary("x").unwrap();
        let y = m.add_binary("y").unwrap();
        m.add_constraint("c", vec![(y, 1.0), (x, 2.0), (y, -1.0), (x, 1.0)], Sense::Ge, 1.0)
            .unwrap();
        assert_eq!(m.constraints()[0].coeffs, vec![(x, 3.0)]);
        assert_eq!(m.max_violation(&[0.0, 0.0]).0, 1.0);
        assert_eq!(m.max_violation(&[1.0, 0.0]).0, 0.0);
    }
}
