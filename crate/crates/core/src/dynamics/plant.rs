use serde::{Deserialize, Serialize};

use super::{make_input, InputSignal, TrajectoryData, MAX_INTERNAL_STEP};
use crate::error::{Error, Result};
use crate::matcore::Mat;

/// Continuous-time plant `x' = f(x, u)`, `y = h(x)`.
pub trait Plant {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn rhs(&self, x: &[f64], u: &[f64], dx: &mut [f64]);
    fn output(&self, x: &[f64], y: &mut [f64]);
}

/// Mass-spring-damper `m z'' + beta(z, z') z' + K(z) = u`, `y = z`, with
/// `K(z) = k1 z + k3 z^3` and `beta(z, z') = b0 + b1 z^2 + b2 z'^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsdParams {
    pub m: f64,
    pub k1: f64,
    pub k3: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl Default for MsdParams {
    /// Cubic spring and quadratic damping with unit coefficients.
    fn default() -> Self {
        Self {
            m: 1.0,
            k1: 1.0,
            k3: 1.0,
            b0: 0.0,
            b1: 1.0,
            b2: 1.0,
        }
    }
}

impl MsdParams {
    /// Linear oscillator `m z'' + b0 z' + k1 z = u`.
    pub fn linear(m: f64, k1: f64, b0: f64) -> Self {
        Self {
            m,
            k1,
            k3: 0.0,
            b0,
            b1: 0.0,
            b2: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.m, self.k1, self.k3, self.b0, self.b1, self.b2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite plant coefficient".into()));
        }
        if self.m <= 0.0 {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {}", self.m)));
        }
        if self.b0 < 0.0 || self.b1 < 0.0 || self.b2 < 0.0 {
            return Err(Error::InvalidParameter("damping coefficients must be non-negative".into()));
        }
        Ok(())
    }

    pub fn spring(&self, z: f64) -> f64 {
        self.k1 * z + self.k3 * z * z * z
    }

    pub fn damping(&self, z: f64, zd: f64) -> f64 {
        self.b0 + self.b1 * z * z + self.b2 * zd * zd
    }

    pub fn is_linear(&self) -> bool {
        self.k3 == 0.0 && self.b1 == 0.0 && self.b2 == 0.0
    }
}

impl Plant for MsdParams {
    fn state_dim(&self) -> usize {
        2
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn rhs(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let (z, zd) = (x[0], x[1]);
        dx[0] = zd;
        dx[1] = (-self.spring(z) - self.damping(z, zd) * zd + u[0]) / self.m;
    }
    fn output(&self, x: &[f64], y: &mut [f64]) {
        y[0] = x[0];
    }
}

type RhsFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;
type OutFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Plant defined by user closures.
pub struct OdePlant {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    rhs: Box<RhsFn>,
    out: Box<OutFn>,
}

impl OdePlant {
    pub fn new(
        n: usize,
        m: usize,
        l: usize,
        rhs: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        out: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            m,
            l,
            rhs: Box::new(rhs),
            out: Box::new(out),
        }
    }
}

impl Plant for OdePlant {
    fn state_dim(&self) -> usize {
        self.n
    }
    fn input_dim(&self) -> usize {
        self.m
    }
    fn output_dim(&self) -> usize {
        self.l
    }
    fn rhs(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        (self.rhs)(x, u, dx)
    }
    fn output(&self, x: &[f64], y: &mut [f64]) {
        (self.out)(x, y)
    }
}

/// Simulates `steps` sampling intervals of length `dt` driven by `signal`.
pub fn simulate(
    plant: &dyn Plant,
    x0: &[f64],
    signal: &InputSignal,
    dt: f64,
    steps: usize,
) -> Result<TrajectoryData> {
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one step".into()));
    }
    let inputs = make_input(signal, steps, plant.input_dim());
    simulate_inputs(plant, x0, &inputs, dt)
}

/// Simulates with an explicit `L x m` input table held constant over each interval.
pub fn simulate_inputs(plant: &dyn Plant, x0: &[f64], inputs: &Mat, dt: f64) -> Result<TrajectoryData> {
    simulate_inputs_with_step(plant, x0, inputs, dt, MAX_INTERNAL_STEP)
}

/// Classical RK4 with zero-order-hold inputs and internal step `<= min(dt, max_step)`.
pub fn simulate_inputs_with_step(
    plant: &dyn Plant,
    x0: &[f64],
    inputs: &Mat,
    dt: f64,
    max_step: f64,
) -> Result<TrajectoryData> {
    let (n, m, l) = (plant.state_dim(), plant.input_dim(), plant.output_dim());
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("sampling time must be positive, got {dt}")));
    }
    if !(max_step > 0.0) {
        return Err(Error::InvalidParameter("internal step must be positive".into()));
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!("x0 has {} entries, plant has {n} states", x0.len())));
    }
    if inputs.cols() != m {
        return Err(Error::DimensionMismatch(format!("input table has {} columns, plant has {m} inputs", inputs.cols())));
    }
    let steps = inputs.rows();
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one step".into()));
    }
    let substeps = (dt / max_step.min(dt) - 1e-9).ceil().max(1.0) as usize;
    let h = dt / substeps as f64;

    let mut states = Mat::zeros(steps + 1, n);
    let mut outputs = Mat::zeros(steps + 1, l);
    let mut x = x0.to_vec();
    let mut y = vec![0.0; l];
    let mut scratch = Rk4Scratch::new(n);

    states.as_mut_slice()[..n].copy_from_slice(&x);
    plant.output(&x, &mut y);
    outputs.as_mut_slice()[..l].copy_from_slice(&y);
    for j in 0..steps {
        let u = inputs.row(j);
        for _ in 0..substeps {
            scratch.step(plant, &mut x, u, h);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: j + 1 });
        }
        plant.output(&x, &mut y);
        states.as_mut_slice()[(j + 1) * n..(j + 2) * n].copy_from_slice(&x);
        outputs.as_mut_slice()[(j + 1) * l..(j + 2) * l].copy_from_slice(&y);
    }
    TrajectoryData::new(dt, states, inputs.clone(), outputs)
}

struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    fn step(&mut self, plant: &dyn Plant, x: &mut [f64], u: &[f64], h: f64) {
        plant.rhs(x, u, &mut self.k1);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        plant.rhs(&self.tmp, u, &mut self.k2);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        plant.rhs(&self.tmp, u, &mut self.k3);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        plant.rhs(&self.tmp, u, &mut self.k4);
        for i in 0..x.len() {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}
