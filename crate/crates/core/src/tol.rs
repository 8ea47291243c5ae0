//! Numeric tolerances shared by the kernels, the solver and the tests.

/// Symmetry check for inputs to the symmetric eigensolver (relative).
pub const SYMMETRY: f64 = 1e-10;
/// Jacobi stops once every off-diagonal entry is below this times `||a||_F`.
pub const JACOBI_OFF_DIAG: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Default relative cutoff for the pseudoinverse.
pub const PINV_RCOND: f64 = 1e-10;
/// Gram-matrix eigenvalues below this fraction of the largest one are noise.
/// Squaring the matrix puts eigensolver round-off near `n * eps * lambda_max`.
pub const GRAM_FLOOR: f64 = 1e-13;
/// LU pivot threshold relative to `||a||_inf`.
pub const SINGULAR_PIVOT: f64 = 1e-12;
pub const GELFAND_REL: f64 = 1e-3;
pub const GELFAND_MAX_DOUBLINGS: u32 = 14;
/// Stricter Gelfand settings used for stability verdicts near the unit circle.
pub const GELFAND_VERDICT_REL: f64 = 1e-12;
pub const GELFAND_VERDICT_MAX_DOUBLINGS: u32 = 60;
pub const ADMM_TOL: f64 = 1e-7;
pub const ADMM_MAX_ITERS: usize = 20_000;
/// Feasibility tolerance on the minimum eigenvalue of the LMI block.
pub const LMI_FEASIBILITY: f64 = 1e-8;
/// Tolerance on the discrete Lyapunov residual when certifying a model.
pub const LYAPUNOV: f64 = 1e-6;
pub const NI_FREQUENCY: f64 = 1e-8;
/// Spectral radius band treated as inconclusive around 1.
pub const STABILITY_MARGIN: f64 = 1e-6;
/// Row-rank test for the stacked data matrix.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Runtime-scalable copy of the certification tolerances.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub admm: f64,
    pub lmi_feasibility: f64,
    pub lyapunov: f64,
    pub ni_frequency: f64,
    pub stability_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            admm: ADMM_TOL,
            lmi_feasibility: LMI_FEASIBILITY,
            lyapunov: LYAPUNOV,
            ni_frequency: NI_FREQUENCY,
            stability_margin: STABILITY_MARGIN,
        }
    }
}

impl Tolerances {
    pub fn scaled(factor: f64) -> Self {
        let d = Self::default();
        Self {
            admm: d.admm * factor,
            lmi_feasibility: d.lmi_feasibility * factor,
            lyapunov: d.lyapunov * factor,
            ni_frequency: d.ni_frequency * factor,
            stability_margin: d.stability_margin * factor,
        }
    }

    /// Reads `NIKOOPMAN_TOL_SCALE`; unset or unparsable values give the defaults.
    pub fn from_env() -> Self {
        match std::env::var("NIKOOPMAN_TOL_SCALE")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
        {
            Some(f) if f.is_finite() && f > 0.0 => Self::scaled(f),
            _ => Self::default(),
        }
    }
}
