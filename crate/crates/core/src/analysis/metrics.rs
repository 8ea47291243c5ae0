use crate::error::{Error, Result};
use crate::matcore::Mat;
use crate::nicore::{tustin, ContinuousLinearModel};

/// Per-column mean squared error over the rows of two sequences.
pub fn mse(reference: &Mat, predicted: &Mat) -> Result<Vec<f64>> {
    if reference.rows() != predicted.rows() {
        return Err(Error::LengthMismatch {
            left: reference.rows(),
            right: predicted.rows(),
        });
    }
    if reference.cols() != predicted.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} reference channels, {} predicted",
            reference.cols(),
            predicted.cols()
        )));
    }
    let rows = reference.rows();
    if rows == 0 {
        return Ok(vec![0.0; reference.cols()]);
    }
    Ok((0..reference.cols())
        .map(|c| {
            (0..rows)
                .map(|j| (reference[(j, c)] - predicted[(j, c)]).powi(2))
                .sum::<f64>()
                / rows as f64
        })
        .collect())
}

/// Outputs above this magnitude mark a step response as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct StepResponse {
    pub dt: f64,
    /// One sequence per input channel; row `k` is the output at `t = k T`.
    pub outputs: Vec<Mat>,
    /// First sample whose output exceeded [`DIVERGENCE_LIMIT`]. The sequences
    /// stop there.
    pub diverged_at: Option<usize>,
}

/// Unit-step responses from rest, one input channel at a time, sampled with
/// the trapezoidal rule.
pub fn step_response(c: &ContinuousLinearModel, dt: f64, steps: usize) -> Result<StepResponse> {
    let d = tustin(c, dt)?;
    let (n, m, l) = (d.state_dim(), d.input_dim(), d.output_dim());
    let mut outputs = Vec::with_capacity(m);
    let mut diverged_at: Option<usize> = None;
    for ch in 0..m {
        let bu = d.b.column(ch);
        let du = d.d.column(ch);
        let mut x = vec![0.0; n];
        let mut rows = Vec::with_capacity((steps + 1) * l);
        for k in 0..=steps {
            if diverged_at.is_some_and(|s| k > s) {
                break;
            }
            let y: Vec<f64> = d.c.mul_vec(&x).iter().zip(&du).map(|(a, b)| a + b).collect();
            let blown = y.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT);
            rows.extend(y);
            if blown {
                diverged_at = Some(diverged_at.map_or(k, |s| s.min(k)));
                break;
            }
            let mut next = d.a.mul_vec(&x);
            next.iter_mut().zip(&bu).for_each(|(a, b)| *a += b);
            x = next;
        }
        outputs.push(Mat::from_row_slice(rows.len() / l.max(1), l, &rows));
    }
    if let Some(s) = diverged_at {
        for o in &mut outputs {
            let keep = o.rows().min(s + 1);
            *o = o.submatrix(0, 0, keep, l);
        }
    }
    Ok(StepResponse { dt, outputs, diverged_at })
}
