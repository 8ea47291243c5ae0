use serde::{Deserialize, Serialize};

use super::{MsdParams, TrajectoryData};

/// `S(x) = m x2^2 / 2 + k1 x1^2 / 2 + k3 x1^4 / 4`, the kinetic energy plus the
/// integral of the spring force.
pub fn storage_value(params: &MsdParams, x: &[f64]) -> f64 {
    let (z, zd) = (x[0], x[1]);
    0.5 * params.m * zd * zd + 0.5 * params.k1 * z * z + 0.25 * params.k3 * z.powi(4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    /// `(j, gap)` with `gap = S(x_{j+1}) - S(x_j) - u_j^T (y_{j+1} - y_j)`.
    pub violations: Vec<(usize, f64)>,
    pub tol: f64,
    pub max_gap: f64,
}

impl DissipationReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Discrete check of `dS/dt <= u^T dy/dt` along a sampled trajectory.
///
/// With zero-order-hold inputs the increment inequality is exact up to the
/// integration error, which `tol` (default `1e-3 * max |S|`) absorbs.
pub fn check_dissipation(traj: &TrajectoryData, params: &MsdParams, tol: Option<f64>) -> DissipationReport {
    let storage: Vec<f64> = (0..traj.states.rows())
        .map(|j| storage_value(params, traj.states.row(j)))
        .collect();
    let tol = tol.unwrap_or_else(|| 1e-3 * storage.iter().fold(0.0_f64, |a, s| a.max(s.abs())));
    let mut violations = Vec::new();
    let mut max_gap = f64::NEG_INFINITY;
    for j in 0..traj.steps() {
        let supply: f64 = traj
            .inputs
            .row(j)
            .iter()
            .zip(traj.outputs.row(j + 1).iter().zip(traj.outputs.row(j)))
            .map(|(u, (y1, y0))| u * (y1 - y0))
            .sum();
        let gap = storage[j + 1] - storage[j] - supply;
        max_gap = max_gap.max(gap);
        if gap > tol {
            violations.push((j, gap));
        }
    }
    DissipationReport {
        violations,
        tol,
        max_gap,
    }
}
