use serde::{Deserialize, Serialize};

use super::ContinuousLinearModel;
use crate::error::{Error, Result};
use crate::matcore::{inverse, solve, sym_eig, Mat};
use crate::tol;

/// `K / (s^2 + 2 zeta omega s + omega^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpfController {
    #[serde(rename = "K")]
    pub k: f64,
    pub zeta: f64,
    pub omega: f64,
}

impl Default for PpfController {
    fn default() -> Self {
        Self {
            k: 0.5,
            zeta: 0.7,
            omega: 2.0,
        }
    }
}

impl PpfController {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.k) && ok(self.zeta) && ok(self.omega) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "PPF parameters must be positive: K={}, zeta={}, omega={}",
                self.k, self.zeta, self.omega
            )))
        }
    }

    pub fn dc_gain(&self) -> f64 {
        self.k / (self.omega * self.omega)
    }
}

/// Controllable canonical form of the PPF filter.
pub fn ppf_realize(ctrl: &PpfController) -> ContinuousLinearModel {
    let w = ctrl.omega;
    ContinuousLinearModel {
        a: Mat::from_row_slice(2, 2, &[0.0, 1.0, -w * w, -2.0 * ctrl.zeta * w]),
        b: Mat::from_row_slice(2, 1, &[0.0, 1.0]),
        c: Mat::from_row_slice(1, 2, &[ctrl.k, 0.0]),
        d: Mat::zeros(1, 1),
    }
}

/// `G(0) = D - C A^-1 B`.
pub fn dc_gain(m: &ContinuousLinearModel) -> Result<Mat> {
    if m.state_dim() == 0 {
        return Ok(m.d.clone());
    }
    let x = solve(&m.a, &m.b)?;
    Ok(&m.d - &(&m.c * &x))
}

/// `lambda_max(G0 Gbar0)`. Beyond the scalar case the eigenvalues are taken
/// through the similarity `S^1/2 R S^1/2`, which needs one of the two
/// DC gains symmetric positive semidefinite.
pub fn dc_gain_lambda_max(g0: &Mat, gbar0: &Mat) -> Result<f64> {
    if g0.cols() != gbar0.rows() || g0.rows() != gbar0.cols() {
        return Err(Error::DimensionMismatch(format!(
            "DC gains {:?} and {:?}",
            g0.shape(),
            gbar0.shape()
        )));
    }
    if g0.rows() == 1 {
        return Ok(g0[(0, 0)] * gbar0[(0, 0)]);
    }
    let scale = g0.max_abs().max(gbar0.max_abs()).max(1e-300);
    let psd_root = |s: &Mat| -> Result<Option<Mat>> {
        if s.asymmetry() > tol::SYMMETRY * scale {
            return Ok(None);
        }
        let e = sym_eig(s)?;
        if e.min() < -tol::SYMMETRY * scale {
            return Ok(None);
        }
        Ok(Some(e.reconstruct_with(|l| l.max(0.0).sqrt())))
    };
    let (root, other) = if let Some(r) = psd_root(gbar0)? {
        (r, g0)
    } else if let Some(r) = psd_root(g0)? {
        (r, gbar0)
    } else {
        return Err(Error::InvalidParameter(
            "neither DC gain is symmetric positive semidefinite".into(),
        ));
    };
    if other.asymmetry() > tol::SYMMETRY * scale {
        return Err(Error::InvalidParameter("DC gain is not symmetric".into()));
    }
    Ok(sym_eig(&(&(&root * other) * &root))?.max())
}

/// Closed loop of a positive-feedback interconnection, with the DC-gain
/// product that enters the stability condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoop {
    /// Input `r` added to the plant input, output the plant output.
    pub model: ContinuousLinearModel,
    /// Infinite when the plant or controller has a pole at the origin, NaN
    /// when the MIMO product has no real spectrum to report.
    pub dc_gain_lambda_max: f64,
}

/// `u = ybar + r`, `ubar = y`, with states stacked as `[x; xbar]`.
pub fn positive_feedback(plant: &ContinuousLinearModel, ctrl: &ContinuousLinearModel) -> Result<ClosedLoop> {
    let (m, l) = (plant.input_dim(), plant.output_dim());
    if ctrl.input_dim() != l || ctrl.output_dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "plant is {l}x{m}, controller is {}x{}",
            ctrl.output_dim(),
            ctrl.input_dim()
        )));
    }
    let (a, b, c, d) = (&plant.a, &plant.b, &plant.c, &plant.d);
    let (ab, bb, cb, db) = (&ctrl.a, &ctrl.b, &ctrl.c, &ctrl.d);
    // y = E (C x + D Cbar xbar + D r) with E = (I - D Dbar)^-1
    let e = inverse(&(&Mat::identity(l) - &(d * db))).map_err(|err| match err {
        Error::Singular { .. } => Error::IllPosed,
        other => other,
    })?;
    let ec = &e * c;
    let edcb = &(&e * d) * cb;
    let ed = &e * d;
    let bdb = b * db;
    let a11 = a + &(&bdb * &ec);
    let a12 = &(b * cb) + &(&bdb * &edcb);
    let a21 = bb * &ec;
    let a22 = ab + &(bb * &edcb);
    let model = ContinuousLinearModel::new(
        Mat::block2(&a11, &a12, &a21, &a22),
        (b + &(&bdb * &ed)).vstack(&(bb * &ed)),
        ec.hstack(&edcb),
        ed,
    )?;
    let dc = match (dc_gain(plant), dc_gain(ctrl)) {
        (Ok(g), Ok(gb)) => dc_gain_lambda_max(&g, &gb).unwrap_or(f64::NAN),
        (Err(Error::Singular { .. }), _) | (_, Err(Error::Singular { .. })) => f64::INFINITY,
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    Ok(ClosedLoop {
        model,
        dc_gain_lambda_max: dc,
    })
}
