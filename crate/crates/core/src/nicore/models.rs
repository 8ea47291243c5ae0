use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{lift, LiftingDictionary};
use crate::matcore::Mat;

/// `psi(j+1) = A psi(j) + B u(j)`, `y(j) = C psi(j) + D u(j)` sampled every `dt` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLinearModel {
    #[serde(rename = "T")]
    pub dt: f64,
    #[serde(rename = "A")]
    pub a: Mat,
    #[serde(rename = "B")]
    pub b: Mat,
    #[serde(rename = "C")]
    pub c: Mat,
    #[serde(rename = "D")]
    pub d: Mat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dict: Option<LiftingDictionary>,
}

fn check_dims(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Result<()> {
    let n = a.rows();
    let ok = a.is_square()
        && b.rows() == n
        && c.cols() == n
        && d.rows() == c.rows()
        && d.cols() == b.cols();
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "A {:?}, B {:?}, C {:?}, D {:?}",
            a.shape(),
            b.shape(),
            c.shape(),
            d.shape()
        )))
    }
}

impl DiscreteLinearModel {
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat, dt: f64) -> Result<Self> {
        check_dims(&a, &b, &c, &d)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("sampling time must be positive, got {dt}")));
        }
        Ok(Self { a, b, c, d, dt, dict: None })
    }

    pub fn with_dict(mut self, dict: LiftingDictionary) -> Self {
        self.dict = Some(dict);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(&self.a, &self.b, &self.c, &self.d)?;
        if let Some(dict) = &self.dict {
            dict.validate()?;
            if dict.lifted_dim() != self.a.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "dictionary lifts to {} but A is {}x{}",
                    dict.lifted_dim(),
                    self.a.rows(),
                    self.a.rows()
                )));
            }
        }
        Ok(())
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.rows()
    }

    /// Initial model state for a native state `x0`: `psi(x0)` when a
    /// dictionary is attached, otherwise `x0` itself.
    pub fn initial_state(&self, x0: &[f64]) -> Result<Vec<f64>> {
        match &self.dict {
            Some(dict) if dict.n == x0.len() => Ok(lift(dict, x0)),
            Some(dict) => Err(Error::DimensionMismatch(format!(
                "x0 has {} entries, dictionary expects {}",
                x0.len(),
                dict.n
            ))),
            None if x0.len() == self.state_dim() => Ok(x0.to_vec()),
            None => Err(Error::DimensionMismatch(format!(
                "x0 has {} entries, model has {} states",
                x0.len(),
                self.state_dim()
            ))),
        }
    }
}

/// `x' = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousLinearModel {
    #[serde(rename = "A")]
    pub a: Mat,
    #[serde(rename = "B")]
    pub b: Mat,
    #[serde(rename = "C")]
    pub c: Mat,
    #[serde(rename = "D")]
    pub d: Mat,
}

impl ContinuousLinearModel {
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        check_dims(&a, &b, &c, &d)?;
        Ok(Self { a, b, c, d })
    }

    /// Static gain `D` with no dynamics.
    pub fn static_gain(d: Mat) -> Self {
        let (l, m) = d.shape();
        Self {
            a: Mat::zeros(0, 0),
            b: Mat::zeros(0, m),
            c: Mat::zeros(l, 0),
            d,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.rows()
    }
}
