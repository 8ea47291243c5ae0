use serde::{Deserialize, Serialize};

use super::metrics::mse;
use crate::dynamics::TrajectoryData;
use crate::error::Result;
use crate::identify::run_lifted;
use crate::matcore::{spectral_radius_with, Mat};
use crate::nicore::{
    dc_gain, discrete_ni_residuals, freq_response, log_grid, ni_frequency_check, phase_deg, positive_feedback,
    ppf_realize, to_continuous, to_discrete, ContinuousLinearModel, DiscreteLinearModel, NiResiduals, PpfController,
    DEFAULT_GRID_MAX, DEFAULT_GRID_MIN, DEFAULT_GRID_POINTS,
};
use crate::tol::{self, Tolerances};

/// A model entering the comparison, with its NI certificate when it has one.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub name: String,
    pub model: DiscreteLinearModel,
    pub certificate: Option<Mat>,
}

/// Log-spaced frequency grid in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            min: DEFAULT_GRID_MIN,
            max: DEFAULT_GRID_MAX,
            points: DEFAULT_GRID_POINTS,
        }
    }
}

impl GridSpec {
    pub fn omegas(&self) -> Vec<f64> {
        log_grid(self.min, self.max, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompareConfig {
    pub grid: GridSpec,
    pub tol: Tolerances,
    /// Closed-loop section is skipped without a controller.
    pub controller: Option<PpfController>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Inconclusive,
}

/// `rho < 1 - margin` is stable, `rho > 1 + margin` unstable.
pub fn stability_verdict(rho: f64, margin: f64) -> Stability {
    if rho < 1.0 - margin {
        Stability::Stable
    } else if rho > 1.0 + margin {
        Stability::Unstable
    } else {
        Stability::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopVerdict {
    #[serde(with = "float_or_tag")]
    pub dc_gain_lambda_max: f64,
    pub dc_condition: bool,
    pub spectral_radius: f64,
    pub spectral_radius_converged: bool,
    pub verdict: Stability,
    pub stable: bool,
}

/// Positive feedback of `plant` with the PPF controller, sampled at `dt`
/// with the bilinear transform and judged by its spectral radius.
pub fn closed_loop_verdict(
    plant: &ContinuousLinearModel,
    ctrl: &PpfController,
    dt: f64,
    margin: f64,
) -> Result<ClosedLoopVerdict> {
    ctrl.validate()?;
    let cl = positive_feedback(plant, &ppf_realize(ctrl))?;
    let disc = to_discrete(&cl.model, dt)?;
    let rho = spectral_radius_with(&disc.a, tol::GELFAND_VERDICT_REL, tol::GELFAND_VERDICT_MAX_DOUBLINGS);
    let verdict = stability_verdict(rho.value, margin);
    Ok(ClosedLoopVerdict {
        dc_gain_lambda_max: cl.dc_gain_lambda_max,
        dc_condition: cl.dc_gain_lambda_max < 1.0,
        spectral_radius: rho.value,
        spectral_radius_converged: rho.converged,
        verdict,
        stable: verdict == Stability::Stable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEvidence {
    /// Minimum over the grid of `lambda_min(j(G - G^*))`.
    pub min_eig_over_grid: f64,
    pub worst_omega: f64,
    pub passes: bool,
    /// Phase range over the grid, single-channel models only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_range_deg: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub state_dim: usize,
    /// Only when the model state contains the plant state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mse_states: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mse_outputs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmi: Option<NiResiduals>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmi_certified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseEvidence>,
    /// Of the bilinear continuous-time image.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dc_gain: Option<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open_loop_spectral_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_loop: Option<ClosedLoopVerdict>,
    /// Failures of individual checks; the other fields stay valid.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    #[serde(skip)]
    pub predicted_outputs: Option<Mat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    #[serde(rename = "T")]
    pub dt: f64,
    pub steps: usize,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<PpfController>,
    pub tolerances: Tolerances,
    pub models: Vec<ModelReport>,
    /// Resolved configuration and seeds of the run.
    #[serde(default)]
    pub provenance: serde_json::Value,
}

/// Simulates every candidate on the inputs of `truth` from its initial state
/// and collects accuracy, NI and closed-loop evidence. A failing check is
/// recorded on its model and does not stop the others.
pub fn compare_models(truth: &TrajectoryData, models: &[Candidate], cfg: &CompareConfig) -> ValidationReport {
    let omegas = cfg.grid.omegas();
    ValidationReport {
        dt: truth.dt,
        steps: truth.steps(),
        grid: cfg.grid,
        controller: cfg.controller,
        tolerances: cfg.tol,
        models: models.iter().map(|c| evaluate(truth, c, cfg, &omegas)).collect(),
        provenance: serde_json::Value::Null,
    }
}

fn evaluate(truth: &TrajectoryData, cand: &Candidate, cfg: &CompareConfig, omegas: &[f64]) -> ModelReport {
    let mdl = &cand.model;
    let mut rep = ModelReport {
        name: cand.name.clone(),
        state_dim: mdl.state_dim(),
        mse_states: None,
        mse_outputs: None,
        lmi: None,
        lmi_certified: None,
        phase: None,
        dc_gain: None,
        open_loop_spectral_radius: None,
        closed_loop: None,
        errors: Vec::new(),
        predicted_outputs: None,
    };
    let mut note = |what: &str, e: crate::Error| rep.errors.push(format!("{what}: {e}"));

    if (mdl.dt - truth.dt).abs() > 1e-12 * truth.dt {
        note(
            "simulation",
            crate::Error::InvalidParameter(format!("model T = {}, data T = {}", mdl.dt, truth.dt)),
        );
    } else {
        match run_lifted(mdl, truth.states.row(0), &truth.inputs) {
            Ok(run) => {
                let n = truth.state_dim();
                let native = mdl.dict.as_ref().is_some_and(|d| d.n == n) || mdl.state_dim() == n;
                if native {
                    match mse(&truth.states, &run.states(n)) {
                        Ok(v) => rep.mse_states = Some(v),
                        Err(e) => note("state error", e),
                    }
                }
                match mse(&truth.outputs, &run.outputs) {
                    Ok(v) => rep.mse_outputs = Some(v),
                    Err(e) => note("output error", e),
                }
                rep.predicted_outputs = Some(run.outputs);
            }
            Err(e) => note("simulation", e),
        }
    }

    if let Some(p) = &cand.certificate {
        match discrete_ni_residuals(mdl, p) {
            Ok(r) => {
                rep.lmi_certified = Some(r.certified(cfg.tol.lyapunov, false));
                rep.lmi = Some(r);
            }
            Err(e) => note("lmi residuals", e),
        }
    }

    let rho = spectral_radius_with(&mdl.a, tol::GELFAND_VERDICT_REL, tol::GELFAND_VERDICT_MAX_DOUBLINGS);
    rep.open_loop_spectral_radius = Some(rho.value);

    let cont = match to_continuous(mdl) {
        Ok(c) => c,
        Err(e) => {
            note("continuous image", e);
            return rep;
        }
    };
    match ni_frequency_check(&cont, omegas) {
        Ok(chk) => {
            let phase_range_deg = if cont.input_dim() == 1 && cont.output_dim() == 1 {
                freq_response(&cont, omegas).ok().map(|gs| {
                    gs.iter()
                        .map(|g| phase_deg(g[(0, 0)]))
                        .fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], p| [lo.min(p), hi.max(p)])
                })
            } else {
                None
            };
            rep.phase = Some(PhaseEvidence {
                min_eig_over_grid: chk.min_eig_over_grid,
                worst_omega: chk.worst_omega,
                passes: chk.passes(cfg.tol.ni_frequency),
                phase_range_deg,
            });
        }
        Err(e) => note("frequency check", e),
    }
    match dc_gain(&cont) {
        Ok(g) => rep.dc_gain = Some(g),
        Err(e) => note("dc gain", e),
    }
    if let Some(ctrl) = &cfg.controller {
        match closed_loop_verdict(&cont, ctrl, mdl.dt, cfg.tol.stability_margin) {
            Ok(v) => rep.closed_loop = Some(v),
            Err(e) => note("closed loop", e),
        }
    }
    rep
}

/// Non-finite floats as the strings "inf", "-inf" and "nan"; JSON has no
/// literal for them.
mod float_or_tag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Tag(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Tag(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("unexpected float tag '{other}'"))),
            },
        }
    }
}
