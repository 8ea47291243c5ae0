use crate::dynamics::MsdParams;
use crate::error::{Error, Result};
use crate::lifting::LiftingDictionary;
use crate::matcore::{expm, Mat};
use crate::nicore::{ContinuousLinearModel, DiscreteLinearModel};

/// Jacobian of the mass-spring-damper at `x0`, with position output.
///
/// The right-hand side is affine in `u`, so the result does not depend on
/// the input the state is linearized at.
pub fn linearize_msd(p: &MsdParams, x0: [f64; 2]) -> ContinuousLinearModel {
    let [z, zd] = x0;
    let a21 = -(p.k1 + 3.0 * p.k3 * z * z) / p.m - 2.0 * p.b1 * z * zd / p.m;
    let a22 = -p.damping(z, zd) / p.m - 2.0 * p.b2 * zd * zd / p.m;
    ContinuousLinearModel {
        a: Mat::from_row_slice(2, 2, &[0.0, 1.0, a21, a22]),
        b: Mat::column_vector(&[0.0, 1.0 / p.m]),
        c: Mat::row_vector(&[1.0, 0.0]),
        d: Mat::zeros(1, 1),
    }
}

/// Zero-order-hold discretization from the exponential of
/// `[[A, B], [0, 0]] T`.
pub fn zoh_discretize(c: &ContinuousLinearModel, dt: f64) -> Result<DiscreteLinearModel> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("sampling time must be positive, got {dt}")));
    }
    let (n, m) = (c.state_dim(), c.input_dim());
    let mut aug = Mat::zeros(n + m, n + m);
    aug.set_block(0, 0, &c.a.scale(dt));
    aug.set_block(0, n, &c.b.scale(dt));
    let e = expm(&aug);
    DiscreteLinearModel::new(
        e.submatrix(0, 0, n, n),
        e.submatrix(0, n, n, m),
        c.c.clone(),
        c.d.clone(),
        dt,
    )
}

/// Linearization at `x0`, sampled with a zero-order hold. The model state is
/// the plant state itself, so it carries the identity dictionary.
pub fn linearized_discrete(p: &MsdParams, x0: [f64; 2], dt: f64) -> Result<DiscreteLinearModel> {
    Ok(zoh_discretize(&linearize_msd(p, x0), dt)?.with_dict(LiftingDictionary::identity(2)))
}
