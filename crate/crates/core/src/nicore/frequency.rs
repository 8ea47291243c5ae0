use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ContinuousLinearModel;
use crate::error::{Error, Result};
use crate::matcore::{csolve, sym_eig, CMat, Mat};

pub const DEFAULT_GRID_MIN: f64 = 1e-2;
pub const DEFAULT_GRID_MAX: f64 = 1e2;
pub const DEFAULT_GRID_POINTS: usize = 200;

/// `n` logarithmically spaced points over `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

/// `G(jw) = C (jw I - A)^-1 B + D` for every `w` in `omegas`.
pub fn freq_response(c: &ContinuousLinearModel, omegas: &[f64]) -> Result<Vec<CMat>> {
    let n = c.state_dim();
    let d = CMat::from_real(&c.d);
    if n == 0 {
        return Ok(vec![d; omegas.len()]);
    }
    let neg_a = c.a.scale(-1.0);
    let b = CMat::from_real(&c.b);
    let cm = CMat::from_real(&c.c);
    omegas
        .iter()
        .map(|&w| {
            let m = CMat::from_parts(&neg_a, &Mat::identity(n).scale(w));
            let x = csolve(&m, &b).map_err(|e| match e {
                Error::Singular { .. } => Error::PoleOnGrid { omega: w },
                other => other,
            })?;
            Ok(cm.matmul(&x).add(&d))
        })
        .collect()
}

/// Phase of a SISO response in degrees, in `(-180, 180]`.
pub fn phase_deg(g: Complex64) -> f64 {
    g.arg().to_degrees()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NiFrequencyCheck {
    pub min_eig_over_grid: f64,
    pub worst_omega: f64,
}

impl NiFrequencyCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_eig_over_grid >= -tol
    }
}

// lambda_min of the Hermitian matrix j(G - G*) through the real symmetric
// embedding [[Hr, -Hi], [Hi, Hr]], which repeats every eigenvalue twice.
fn min_eig_ni(g: &CMat) -> Result<f64> {
    let (gr, gi) = (g.re(), g.im());
    // j(G - G*) = -(Gi + Gi^T) + j (Gr - Gr^T)
    let hr = (&gi + &gi.transpose()).scale(-1.0);
    let hi = &gr - &gr.transpose();
    if hr.rows() == 1 {
        return Ok(hr[(0, 0)]);
    }
    let emb = Mat::block2(&hr, &hi.scale(-1.0), &hi, &hr);
    Ok(sym_eig(&emb)?.min())
}

/// Grid check of `j(G(jw) - G(jw)*) >= 0` at every `w > 0`. For SISO models
/// the eigenvalue is `-2 Im G(jw)`.
pub fn ni_frequency_check(c: &ContinuousLinearModel, omegas: &[f64]) -> Result<NiFrequencyCheck> {
    if c.input_dim() != c.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "NI check needs a square system, got {} outputs and {} inputs",
            c.output_dim(),
            c.input_dim()
        )));
    }
    let positive: Vec<f64> = omegas.iter().copied().filter(|w| *w > 0.0).collect();
    let resp = freq_response(c, &positive)?;
    let mut best = NiFrequencyCheck {
        min_eig_over_grid: f64::INFINITY,
        worst_omega: f64::NAN,
    };
    for (g, &w) in resp.iter().zip(&positive) {
        let e = min_eig_ni(g)?;
        if e < best.min_eig_over_grid {
            best = NiFrequencyCheck {
                min_eig_over_grid: e,
                worst_omega: w,
            };
        }
    }
    Ok(best)
}
