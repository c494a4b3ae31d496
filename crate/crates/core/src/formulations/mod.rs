//! Builders that turn an [`Instance`] into a [`MilpModel`] for each
//! formulation, plus the bridge back to edge-use vectors.

mod stsp;
mod variants;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bnb::{ConnectivitySeparator, CutDemand};
use crate::error::{Error, Result};
use crate::instance::{Instance, NodeId};
use crate::milp::{MilpModel, VarId, EPS_INT};

pub use variants::{scptp_capacity_audit, StsptwRoute};

/// Problem family a formulation solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Stsp,
    Sop,
    Scptp,
    Stsptw,
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stsp" => Ok(Problem::Stsp),
            "sop" => Ok(Problem::Sop),
            "scptp" => Ok(Problem::Scptp),
            "stsptw" => Ok(Problem::Stsptw),
            _ => Err(Error::InvalidArgument(format!("unknown variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FormulationTag {
    ClassicalCut,
    Scf,
    ScfStrong,
    Mcf,
    Ts1,
    Ts2,
    SopCut,
    SopTs,
    SopMcf,
    SopScf,
    SopScfStrong,
    ScptpCut,
    ScptpTs,
    ScptpScf,
    ScptpMcf,
    Stsptw,
}

impl FormulationTag {
    pub const STSP: [FormulationTag; 6] = [
        FormulationTag::ClassicalCut,
        FormulationTag::Scf,
        FormulationTag::ScfStrong,
        FormulationTag::Mcf,
        FormulationTag::Ts1,
        FormulationTag::Ts2,
    ];
    pub const SOP: [FormulationTag; 5] = [
        FormulationTag::SopCut,
        FormulationTag::SopTs,
        FormulationTag::SopMcf,
        FormulationTag::SopScf,
        FormulationTag::SopScfStrong,
    ];
    pub const SCPTP: [FormulationTag; 4] = [
        FormulationTag::ScptpCut,
        FormulationTag::ScptpTs,
        FormulationTag::ScptpScf,
        FormulationTag::ScptpMcf,
    ];

    pub fn problem(self) -> Problem {
        use FormulationTag::*;
        match self {
            ClassicalCut | Scf | ScfStrong | Mcf | Ts1 | Ts2 => Problem::Stsp,
            SopCut | SopTs | SopMcf | SopScf | SopScfStrong => Problem::Sop,
            ScptpCut | ScptpTs | ScptpScf | ScptpMcf => Problem::Scptp,
            Stsptw => Problem::Stsptw,
        }
    }

    pub fn all_for(problem: Problem) -> &'static [FormulationTag] {
        match problem {
            Problem::Stsp => &Self::STSP,
            Problem::Sop => &Self::SOP,
            Problem::Scptp => &Self::SCPTP,
            Problem::Stsptw => &[FormulationTag::Stsptw],
        }
    }

    /// Whether the model relies on connectivity cuts separated on the fly.
    pub fn uses_cuts(self) -> bool {
        matches!(self, FormulationTag::ClassicalCut | FormulationTag::SopCut | FormulationTag::ScptpCut)
    }

    pub fn is_time_staged(self) -> bool {
        matches!(
            self,
            FormulationTag::Ts1 | FormulationTag::Ts2 | FormulationTag::SopTs | FormulationTag::ScptpTs
        )
    }

    pub fn name(self) -> &'static str {
        use FormulationTag::*;
        match self {
            ClassicalCut => "CLASSICAL_CUT",
            Scf => "SCF",
            ScfStrong => "SCF_STRONG",
            Mcf => "MCF",
            Ts1 => "TS1",
            Ts2 => "TS2",
            SopCut => "SOP_CUT",
            SopTs => "SOP_TS",
            SopMcf => "SOP_MCF",
            SopScf => "SOP_SCF",
            SopScfStrong => "SOP_SCF_STRONG",
            ScptpCut => "SCPTP_CUT",
            ScptpTs => "SCPTP_TS",
            ScptpScf => "SCPTP_SCF",
            ScptpMcf => "SCPTP_MCF",
            Stsptw => "STSPTW",
        }
    }
}

impl fmt::Display for FormulationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormulationTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_uppercase().replace('-', "_");
        let alias = match norm.as_str() {
            "CLASSICAL" | "CUT" => "CLASSICAL_CUT",
            other => other,
        };
        FormulationTag::STSP
            .iter()
            .chain(FormulationTag::SOP.iter())
            .chain(FormulationTag::SCPTP.iter())
            .chain(std::iter::once(&FormulationTag::Stsptw))
            .copied()
            .find(|t| t.name() == alias)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown formulation tag `{s}`")))
    }
}

/// Layer structure of the time-window model, kept for route recovery.
#[derive(Debug, Clone)]
pub(crate) struct LayerLayout {
    /// `xt[k][a]`: arc `a` traversed after `k` services.
    pub xt: Vec<Vec<VarId>>,
    /// `(customer, y[k - 1])` for `k = 1..=n_R`.
    pub y: Vec<(NodeId, Vec<VarId>)>,
}

/// A built model together with what is needed to interpret its solutions.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub tag: FormulationTag,
    pub model: MilpModel,
    /// Stage count for time-staged models.
    pub stages: Option<usize>,
    node_count: usize,
    endpoints: Vec<(NodeId, NodeId)>,
    /// Variables whose sum is the use count of each edge.
    edge_terms: Vec<Vec<VarId>>,
    /// Variables whose sum says whether a customer is served.
    service_terms: Vec<(NodeId, Vec<VarId>)>,
    cut_targets: Option<Vec<(NodeId, CutDemand)>>,
    layers: Option<LayerLayout>,
}

/// Knobs accepted by [`build`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Overrides the stage count of time-staged tags.
    pub stages: Option<usize>,
    /// Accept a capacity above the total demand (otherwise an error).
    pub allow_excess_capacity: bool,
    /// Builds the time-window model from its summed time rows alone, without
    /// the per-layer degree limits, pass-through rows, return row and the
    /// service switch on the clock row. That model is not exact: it can trade
    /// time between two visits of a node in one layer, and it forbids passing
    /// through a customer without serving it. Kept for comparison only.
    pub literal_time_rows: bool,
}

/// Builds the model for `tag`.
pub fn build(inst: &Instance, tag: FormulationTag, opts: BuildOptions) -> Result<Formulation> {
    use FormulationTag::*;
    let mut f = match tag {
        ClassicalCut => stsp::classical(inst),
        Scf => stsp::scf(inst, false),
        ScfStrong => stsp::scf(inst, true),
        Mcf => stsp::mcf(inst),
        Ts1 => stsp::ts(inst, tag, opts.stages.unwrap_or(2 * inst.edge_count())),
        Ts2 => stsp::ts(inst, tag, opts.stages.unwrap_or(2 * inst.node_count().saturating_sub(1))),
        SopCut | ScptpCut => variants::cut(inst, tag, opts),
        SopTs | ScptpTs => {
            let k = opts.stages.unwrap_or(2 * inst.node_count().saturating_sub(1));
            variants::ts(inst, tag, k, opts)
        }
        SopMcf | ScptpMcf => variants::mcf(inst, tag, opts),
        SopScf | SopScfStrong => variants::sop_scf(inst, tag == SopScfStrong),
        ScptpScf => variants::scptp_scf(inst, opts),
        Stsptw => variants::stsptw(inst, !opts.literal_time_rows),
    }?;
    f.model.set_provenance(crate::milp::Provenance {
        tag: tag.name().to_string(),
        fingerprint: inst.fingerprint(),
    });
    Ok(f)
}

impl Formulation {
    pub(crate) fn new(tag: FormulationTag, inst: &Instance, model: MilpModel) -> Self {
        Formulation {
            tag,
            model,
            stages: None,
            node_count: inst.node_count(),
            endpoints: inst.edges().iter().map(|e| (e.u, e.v)).collect(),
            edge_terms: vec![Vec::new(); inst.edge_count()],
            service_terms: Vec::new(),
            cut_targets: None,
            layers: None,
        }
    }

    /// Separation callback for cut-based tags.
    pub fn separator(&self) -> Option<ConnectivitySeparator> {
        let targets = self.cut_targets.clone()?;
        let edges = self
            .endpoints
            .iter()
            .zip(&self.edge_terms)
            .map(|(&(u, v), vars)| (u, v, vars.clone()))
            .collect();
        Some(ConnectivitySeparator::new(self.node_count, edges, targets))
    }

    /// Fractional edge values `x_e` (sum over both directions and stages).
    pub fn project_edges(&self, x: &[f64]) -> Vec<f64> {
        self.edge_terms
            .iter()
            .map(|vars| vars.iter().map(|&j| x[j]).sum())
            .collect()
    }

    /// Integral edge-use vector of an integral solution.
    pub fn extract_edge_uses(&self, x: &[f64]) -> Result<Vec<u32>> {
        for (j, v) in self.model.variables().iter().enumerate() {
            if v.kind.is_integer() && (x[j] - x[j].round()).abs() > EPS_INT {
                return Err(Error::Solution(format!("`{}` = {} is not integral", v.name, x[j])));
            }
        }
        Ok(self.project_edges(x).iter().map(|v| v.round().max(0.0) as u32).collect())
    }

    /// Customers served by an integral solution (all required nodes for the
    /// plain problem).
    pub fn served(&self, x: &[f64]) -> Vec<NodeId> {
        self.service_terms
            .iter()
            .filter(|(_, vars)| vars.is_empty() || vars.iter().map(|&j| x[j]).sum::<f64>() > 0.5)
            .map(|&(i, _)| i)
            .collect()
    }

    /// Fractional service levels `y_i` of an LP point.
    pub fn service_levels(&self, x: &[f64]) -> Vec<(NodeId, f64)> {
        self.service_terms
            .iter()
            .map(|(i, vars)| {
                let level = if vars.is_empty() { 1.0 } else { vars.iter().map(|&j| x[j]).sum() };
                (*i, level)
            })
            .collect()
    }

    /// Layered walk and service events of an integral time-window solution.
    pub fn stsptw_route(&self, inst: &Instance, x: &[f64]) -> Result<StsptwRoute> {
        let layers = self
            .layers
            .as_ref()
            .ok_or_else(|| Error::Solution(format!("{} has no layered route", self.tag)))?;
        variants::route_from_layers(inst, layers, x)
    }
}

#[cfg(test)]
mod tests;
