use serde::{Deserialize, Serialize};

use super::admm::AdmmSettings;
use super::edmd::{edmd_fit, reduce_cost, EdmdSolution};
use super::program::{refit_strict_b, solve_ni, NiProgram, NiProgramSolution};
use crate::dynamics::TrajectoryData;
use crate::error::{Error, Result};
use crate::lifting::{build_matrices, LiftingDictionary};
use crate::matcore::Mat;
use crate::nicore::DiscreteLinearModel;

pub const DEFAULT_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiConfig {
    pub alpha: f64,
    /// Weighting matrix; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Mat>,
    /// Refit `P` so that `B_d` satisfies the certificate's input equality.
    pub strict_b: bool,
    pub admm: AdmmSettings,
}

impl Default for NiConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            w: None,
            strict_b: false,
            admm: AdmmSettings::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NiIdentification {
    pub model: DiscreteLinearModel,
    pub program: NiProgramSolution,
    pub edmd: EdmdSolution,
}

fn model_from(a: Mat, b: Mat, c: Mat, dt: f64, dict: &LiftingDictionary) -> Result<DiscreteLinearModel> {
    let d = Mat::zeros(c.rows(), b.cols());
    Ok(DiscreteLinearModel::new(a, b, c, d, dt)?.with_dict(dict.clone()))
}

/// Plain EDMD model `(G_A, G_B, C_d, 0)`.
pub fn identify_unconstrained(traj: &TrajectoryData, dict: &LiftingDictionary) -> Result<(DiscreteLinearModel, EdmdSolution)> {
    let dm = build_matrices(traj, dict)?;
    let sol = edmd_fit(&dm)?;
    let model = model_from(sol.g_a.clone(), sol.g_b.clone(), sol.c_d.clone(), traj.dt, dict)?;
    Ok((model, sol))
}

/// EDMD followed by the NI-constrained program. A solver that stops at the
/// iteration limit still yields a model; check `program.diagnostics.converged`.
pub fn identify_ni(traj: &TrajectoryData, dict: &LiftingDictionary, cfg: &NiConfig) -> Result<NiIdentification> {
    let dm = build_matrices(traj, dict)?;
    let edmd = edmd_fit(&dm)?;
    let n = dict.lifted_dim();
    let w = cfg.w.clone().unwrap_or_else(|| Mat::identity(n));
    let cost = reduce_cost(&dm, &edmd, &w)?;
    let prog = NiProgram {
        g_a: cost.g_a,
        g_b: cost.g_b,
        w: cost.w,
        alpha: cfg.alpha,
        dt: traj.dt,
        settings: cfg.admm,
    };
    let mut program = solve_ni(&prog)?;
    if cfg.strict_b {
        program = refit_strict_b(&prog, &program, &edmd.c_d)?;
    }
    let model = model_from(program.a_d.clone(), program.b_d.clone(), edmd.c_d.clone(), traj.dt, dict)?;
    Ok(NiIdentification { model, program, edmd })
}

/// Lifted states `psi_0 .. psi_L` and outputs `y_0 .. y_L`, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedRun {
    pub psi: Mat,
    pub outputs: Mat,
}

impl LiftedRun {
    /// Predicted native state: the leading `n` lifted coordinates.
    pub fn states(&self, n: usize) -> Mat {
        self.psi.submatrix(0, 0, self.psi.rows(), n)
    }
}

pub fn run_lifted(mdl: &DiscreteLinearModel, x0: &[f64], inputs: &Mat) -> Result<LiftedRun> {
    if inputs.cols() != mdl.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "inputs have {} channels, model has {}",
            inputs.cols(),
            mdl.input_dim()
        )));
    }
    let steps = inputs.rows();
    let mut psi = mdl.initial_state(x0)?;
    let mut states = Mat::zeros(steps + 1, mdl.state_dim());
    let mut outputs = Mat::zeros(steps + 1, mdl.output_dim());
    for j in 0..=steps {
        states.row_mut(j).copy_from_slice(&psi);
        let y = mdl.c.mul_vec(&psi);
        outputs.row_mut(j).copy_from_slice(&y);
        if j < steps {
            let u = inputs.row(j);
            let mut next = mdl.a.mul_vec(&psi);
            next.iter_mut().zip(mdl.b.mul_vec(u)).for_each(|(a, b)| *a += b);
            psi = next;
        }
    }
    // feedthrough on sampled inputs; the last output has no input sample
    if mdl.d.max_abs() != 0.0 {
        for j in 0..steps {
            let du = mdl.d.mul_vec(inputs.row(j));
            outputs.row_mut(j).iter_mut().zip(du).for_each(|(a, b)| *a += b);
        }
    }
    Ok(LiftedRun { psi: states, outputs })
}

/// Output sequence `y_0 .. y_L` of the lifted recursion started at `psi(x0)`.
pub fn simulate_lifted(mdl: &DiscreteLinearModel, x0: &[f64], inputs: &Mat) -> Result<Mat> {
    Ok(run_lifted(mdl, x0, inputs)?.outputs)
}
