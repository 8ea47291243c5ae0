use serde::{Deserialize, Serialize};

use super::DiscreteLinearModel;
use crate::error::{Error, Result};
use crate::matcore::{sym_eig, Lu, Mat};

/// Residuals of the discrete NI certificate for a given `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NiResiduals {
    /// `lambda_max(A P A^T - P)`.
    pub lyap_max_eig: f64,
    /// `|| B - (-(1/T)(A - I) P (I + A^T)^-1 C^T) ||_F`.
    pub b_eq_gap: f64,
    pub p_min_eig: f64,
}

impl NiResiduals {
    pub fn certified(&self, tol: f64, strict: bool) -> bool {
        self.lyap_max_eig <= tol && self.p_min_eig >= -tol && (!strict || self.b_eq_gap <= tol)
    }
}

/// `-(1/T)(A - I) P (I + A^T)^-1 C^T`, the input matrix implied by `P`.
pub(crate) fn implied_b(a: &Mat, c: &Mat, p: &Mat, dt: f64) -> Result<Mat> {
    let n = a.rows();
    let eye = Mat::identity(n);
    let lu = Lu::factor(&(&eye + &a.transpose()))?;
    let x = lu.solve(&c.transpose());
    Ok((&(&(a - &eye) * p) * &x).scale(-1.0 / dt))
}

pub fn discrete_ni_residuals(mdl: &DiscreteLinearModel, p: &Mat) -> Result<NiResiduals> {
    let n = mdl.state_dim();
    if p.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "P is {}x{}, A is {n}x{n}",
            p.rows(),
            p.cols()
        )));
    }
    let a = &mdl.a;
    let lyap = &(&(a * p) * &a.transpose()) - p;
    let lyap_max_eig = sym_eig(&lyap)?.max();
    let p_min_eig = sym_eig(p)?.min();
    let b_eq_gap = (&mdl.b - &implied_b(a, &mdl.c, p, mdl.dt)?).frobenius_norm();
    Ok(NiResiduals {
        lyap_max_eig,
        b_eq_gap,
        p_min_eig,
    })
}

/// `lambda_max(A P + P A^T)` for a continuous-time `A`.
pub fn continuous_lyapunov_max_eig(a: &Mat, p: &Mat) -> Result<f64> {
    let ap = a * p;
    Ok(sym_eig(&(&ap + &ap.transpose()))?.max())
}
