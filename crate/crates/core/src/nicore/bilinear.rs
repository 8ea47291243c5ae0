use super::{ContinuousLinearModel, DiscreteLinearModel};
use crate::error::{Error, Result};
use crate::matcore::{inverse, Mat};

/// Bilinear map of a discrete realization to continuous time:
///
/// ```text
/// A = (1/T) (I + Ad)^-1 (Ad - I)      B = (1/sqrt T) (I + Ad)^-1 Bd
/// C = (1/sqrt T) Cd (I + Ad)^-1       D = Dd - Cd (I + Ad)^-1 Bd
/// ```
pub fn to_continuous(d: &DiscreteLinearModel) -> Result<ContinuousLinearModel> {
    let n = d.a.rows();
    let eye = Mat::identity(n);
    let inv = inverse(&(&eye + &d.a)).map_err(|e| match e {
        Error::Singular { .. } => Error::SingularAtMinusOne,
        other => other,
    })?;
    let t = d.dt;
    let a = (&inv * &(&d.a - &eye)).scale(1.0 / t);
    let b = (&inv * &d.b).scale(1.0 / t.sqrt());
    let c = (&d.c * &inv).scale(1.0 / t.sqrt());
    let dd = &d.d - &(&(&d.c * &inv) * &d.b);
    ContinuousLinearModel::new(a, b, c, dd)
}

/// Exact inverse of [`to_continuous`]:
///
/// ```text
/// Ad = (I - T A)^-1 (I + T A)         Bd = 2 sqrt T (I - T A)^-1 B
/// Cd = 2 sqrt T C (I - T A)^-1        Dd = D + 2 T C (I - T A)^-1 B
/// ```
pub fn to_discrete(c: &ContinuousLinearModel, dt: f64) -> Result<DiscreteLinearModel> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("sampling time must be positive, got {dt}")));
    }
    let n = c.a.rows();
    let eye = Mat::identity(n);
    let ta = c.a.scale(dt);
    let k = inverse(&(&eye - &ta))?;
    let a = &k * &(&eye + &ta);
    let s = 2.0 * dt.sqrt();
    let kb = &k * &c.b;
    let b = kb.scale(s);
    let cc = (&c.c * &k).scale(s);
    let d = &c.d + &(&c.c * &kb).scale(2.0 * dt);
    DiscreteLinearModel::new(a, b, cc, d, dt)
}

/// State-preserving trapezoidal (Tustin) discretization with step `dt`:
/// `x+ = (I - dt A/2)^-1 ((I + dt A/2) x + dt B u)`, output map unchanged.
///
/// Unlike [`to_discrete`], whose image satisfies `Gd(z) = 2 G(s) - D`, this
/// keeps the transfer gain and the meaning of the state, so it is the form
/// used to simulate a continuous model.
pub fn tustin(c: &ContinuousLinearModel, dt: f64) -> Result<DiscreteLinearModel> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("sampling time must be positive, got {dt}")));
    }
    let n = c.a.rows();
    let eye = Mat::identity(n);
    let half = c.a.scale(0.5 * dt);
    let k = inverse(&(&eye - &half))?;
    let a = &k * &(&eye + &half);
    let b = (&k * &c.b).scale(dt);
    DiscreteLinearModel::new(a, b, c.c.clone(), c.d.clone(), dt)
}
