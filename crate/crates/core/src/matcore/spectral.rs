use super::Mat;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRadius {
    pub value: f64,
    pub converged: bool,
    pub doublings: u32,
}

/// Gelfand estimate `||a^(2^k)||_F^(1/2^k)` with the default stopping rule.
pub fn spectral_radius(a: &Mat) -> SpectralRadius {
    spectral_radius_with(a, tol::GELFAND_REL, tol::GELFAND_MAX_DOUBLINGS)
}

/// Gelfand estimate with explicit relative tolerance and doubling cap.
///
/// The power is renormalized after every squaring and the log of the
/// discarded norms is accumulated, so large exponents neither overflow nor
/// underflow.
pub fn spectral_radius_with(a: &Mat, rel_tol: f64, max_doublings: u32) -> SpectralRadius {
    assert!(a.is_square(), "spectral radius of a non-square matrix");
    let norm = a.frobenius_norm();
    if a.rows() == 0 || norm == 0.0 {
        return SpectralRadius {
            value: 0.0,
            converged: true,
            doublings: 0,
        };
    }
    let mut b = a.scale(1.0 / norm);
    // log ||a^(2^k)||_F = log_norm
    let mut log_norm = norm.ln();
    let mut estimate = norm;
    for k in 1..=max_doublings {
        let sq = &b * &b;
        let sn = sq.frobenius_norm();
        if sn == 0.0 || !sn.is_finite() {
            // nilpotent to working precision
            return SpectralRadius {
                value: 0.0,
                converged: sn == 0.0,
                doublings: k,
            };
        }
        log_norm = 2.0 * log_norm + sn.ln();
        b = sq.scale(1.0 / sn);
        let next = (log_norm / 2f64.powi(k as i32)).exp();
        if (next - estimate).abs() <= rel_tol * next.max(f64::MIN_POSITIVE) {
            return SpectralRadius {
                value: next,
                converged: true,
                doublings: k,
            };
        }
        estimate = next;
    }
    SpectralRadius {
        value: estimate,
        converged: false,
        doublings: max_doublings,
    }
}
