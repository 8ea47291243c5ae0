use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::DataMatrices;
use crate::matcore::{gram_rank, pinv, Mat};
use crate::tol;

/// Least-squares Koopman fit `[G_A G_B]` and output map `C_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdmdSolution {
    pub g_a: Mat,
    pub g_b: Mat,
    pub c_d: Mat,
    /// `||Theta+ - [G_A G_B][Theta; Omega]||_F^2`.
    pub residual_j1: f64,
    /// `||Y - C_d Theta||_F^2`.
    pub residual_j2: f64,
}

pub fn edmd_fit(dm: &DataMatrices) -> Result<EdmdSolution> {
    let xi = dm.stacked();
    if xi.max_abs() == 0.0 {
        return Err(Error::DegenerateData("lifted states and inputs are all zero".into()));
    }
    let n = dm.theta.rows();
    let gab = &dm.theta_plus * &pinv(&xi, tol::PINV_RCOND)?;
    let g_a = gab.submatrix(0, 0, n, n);
    let g_b = gab.submatrix(0, n, n, gab.cols() - n);
    let c_d = &dm.y * &pinv(&dm.theta, tol::PINV_RCOND)?;
    let residual_j1 = (&dm.theta_plus - &(&gab * &xi)).frobenius_norm().powi(2);
    let residual_j2 = (&dm.y - &(&c_d * &dm.theta)).frobenius_norm().powi(2);
    Ok(EdmdSolution {
        g_a,
        g_b,
        c_d,
        residual_j1,
        residual_j2,
    })
}

/// The weighted cost in terms of the EDMD solution:
/// `||W (G_A P - Q)||_F^2 + ||W (G_B - B_d)||_F^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCost {
    pub g_a: Mat,
    pub g_b: Mat,
    pub w: Mat,
}

impl ReducedCost {
    pub fn state_part(&self, p: &Mat, q: &Mat) -> f64 {
        (&self.w * &(&(&self.g_a * p) - q)).frobenius_norm().powi(2)
    }

    pub fn input_part(&self, b_d: &Mat) -> f64 {
        (&self.w * &(&self.g_b - b_d)).frobenius_norm().powi(2)
    }

    pub fn evaluate(&self, p: &Mat, q: &Mat, b_d: &Mat) -> f64 {
        self.state_part(p, q) + self.input_part(b_d)
    }
}

/// Checks that `[Theta; Omega]` has full row rank and packages the reduced cost.
pub fn reduce_cost(dm: &DataMatrices, sol: &EdmdSolution, w: &Mat) -> Result<ReducedCost> {
    let xi = dm.stacked();
    let rank = gram_rank(&xi, tol::RANK_THRESHOLD)?;
    if rank < xi.rows() {
        return Err(Error::RankDeficient { rank, rows: xi.rows() });
    }
    let n = sol.g_a.rows();
    if w.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("W is {:?}, expected {n}x{n}", w.shape())));
    }
    Ok(ReducedCost {
        g_a: sol.g_a.clone(),
        g_b: sol.g_b.clone(),
        w: w.clone(),
    })
}
