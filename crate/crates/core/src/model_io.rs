//! JSON files for identified and linearized models.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::Candidate;
use crate::error::{Error, Result};
use crate::identify::{NiDiagnostics, NiIdentification};
use crate::matcore::Mat;
use crate::nicore::{ContinuousLinearModel, DiscreteLinearModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ni,
    Unconstrained,
    Linearized,
}

/// Solver record of an NI-constrained fit; `P` certifies the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverBlock {
    pub iterations: usize,
    pub converged: bool,
    pub primal_res: f64,
    pub dual_res: f64,
    pub objective: f64,
    pub alpha: f64,
    pub strict_b: bool,
    #[serde(rename = "P")]
    pub p: Mat,
    pub diagnostics: NiDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub kind: ModelKind,
    #[serde(flatten)]
    pub model: DiscreteLinearModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverBlock>,
    /// Continuous-time model the discrete one was sampled from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuous: Option<ContinuousLinearModel>,
    /// Resolved configuration of the run that produced the file.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl ModelFile {
    pub fn unconstrained(model: DiscreteLinearModel) -> Self {
        Self {
            kind: ModelKind::Unconstrained,
            model,
            solver: None,
            continuous: None,
            config: serde_json::Value::Null,
        }
    }

    pub fn ni(id: &NiIdentification, alpha: f64, strict_b: bool) -> Self {
        let d = &id.program.diagnostics;
        Self {
            kind: ModelKind::Ni,
            model: id.model.clone(),
            solver: Some(SolverBlock {
                iterations: d.iterations,
                converged: d.converged,
                primal_res: d.primal_res,
                dual_res: d.dual_res,
                objective: d.objective,
                alpha,
                strict_b,
                p: id.program.p.clone(),
                diagnostics: d.clone(),
            }),
            continuous: None,
            config: serde_json::Value::Null,
        }
    }

    pub fn linearized(continuous: ContinuousLinearModel, sampled: DiscreteLinearModel) -> Self {
        Self {
            kind: ModelKind::Linearized,
            model: sampled,
            solver: None,
            continuous: Some(continuous),
            config: serde_json::Value::Null,
        }
    }

    pub fn with_config(mut self, config: serde_json::Value) -> Self {
        self.config = config;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if let Some(s) = &self.solver {
            let n = self.model.state_dim();
            if s.p.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!("P is {:?}, model has {n} states", s.p.shape())));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn candidate(&self, name: impl Into<String>) -> Candidate {
        Candidate {
            name: name.into(),
            model: self.model.clone(),
            certificate: self.solver.as_ref().map(|s| s.p.clone()),
        }
    }
}
