//! Thin-plate RBF lifting dictionary and EDMD data matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::TrajectoryData;
use crate::error::{Error, Result};
use crate::matcore::Mat;

/// Draws closer than this are rejected as duplicates.
const DUPLICATE_DISTANCE: f64 = 1e-9;
const MAX_REDRAWS: usize = 10_000;
/// Relative inflation of the empirical state box used for center sampling.
pub const BOX_INFLATION: f64 = 0.10;

/// Per-dimension affine map `z = (x - mean) / std` applied before the RBFs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    /// Column means and standard deviations of `states` (zero spread maps to 1).
    pub fn fit(states: &Mat) -> Self {
        let (rows, n) = states.shape();
        let mut mean = vec![0.0; n];
        let mut std = vec![0.0; n];
        for c in 0..n {
            let col = states.column(c);
            let mu = col.iter().sum::<f64>() / rows as f64;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / rows as f64;
            mean[c] = mu;
            std[c] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Self { mean, std }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// `psi(x) = [x, phi(|z - r_1|), ..., phi(|z - r_K|)]` with `phi(d) = d^2 ln d`
/// and `z` the (optionally normalized) state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftingDictionary {
    pub n: usize,
    pub centers: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
}

impl LiftingDictionary {
    /// Dictionary with no RBFs: plain linear EDMD on the native state.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            centers: Vec::new(),
            normalization: None,
        }
    }

    pub fn n_rbf(&self) -> usize {
        self.centers.len()
    }

    /// Lifted dimension `N = n + N_rbf`.
    pub fn lifted_dim(&self) -> usize {
        self.n + self.centers.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.centers.iter().any(|c| c.len() != self.n) {
            return Err(Error::DimensionMismatch("center dimension differs from n".into()));
        }
        if let Some(norm) = &self.normalization {
            if norm.mean.len() != self.n || norm.std.len() != self.n {
                return Err(Error::DimensionMismatch("normalization dimension differs from n".into()));
            }
        }
        for (i, a) in self.centers.iter().enumerate() {
            for b in &self.centers[..i] {
                if dist(a, b) <= DUPLICATE_DISTANCE {
                    return Err(Error::InvalidParameter("duplicate RBF centers".into()));
                }
            }
        }
        Ok(())
    }

    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        lift(self, x)
    }
}

/// Thin-plate kernel `d^2 ln d`, continuously extended by 0 at `d = 0`.
pub fn thin_plate(d: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        d * d * d.ln()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Lifts one state vector; panics if `x.len() != dict.n`.
pub fn lift(dict: &LiftingDictionary, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), dict.n, "state dimension");
    let mut out = Vec::with_capacity(dict.lifted_dim());
    out.extend_from_slice(x);
    let z = match &dict.normalization {
        Some(norm) => norm.apply(x),
        None => x.to_vec(),
    };
    out.extend(dict.centers.iter().map(|r| thin_plate(dist(&z, r))));
    out
}

/// Draws `n_rbf` centers uniformly in the box `bounds[k] = (lo, hi)`,
/// redrawing any point within `1e-9` of an earlier one.
pub fn sample_centers(n: usize, n_rbf: usize, bounds: &[(f64, f64)], seed: u64) -> Result<LiftingDictionary> {
    if bounds.len() != n {
        return Err(Error::DimensionMismatch(format!("{} bounds for {n} dimensions", bounds.len())));
    }
    if bounds.iter().any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || hi < lo) {
        return Err(Error::InvalidParameter("center box must be finite with lo <= hi".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(n_rbf);
    let mut redraws = 0;
    while centers.len() < n_rbf {
        let c: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo })
            .collect();
        if centers.iter().any(|r| dist(r, &c) <= DUPLICATE_DISTANCE) {
            redraws += 1;
            if redraws > MAX_REDRAWS {
                return Err(Error::InvalidParameter("center box too small for distinct centers".into()));
            }
            continue;
        }
        centers.push(c);
    }
    Ok(LiftingDictionary {
        n,
        centers,
        normalization: None,
    })
}

/// Empirical per-dimension min/max of `states`, widened by [`BOX_INFLATION`].
pub fn empirical_box(states: &Mat) -> Vec<(f64, f64)> {
    (0..states.cols())
        .map(|c| {
            let col = states.column(c);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let width = hi - lo;
            let pad = if width > 0.0 {
                0.5 * BOX_INFLATION * width
            } else {
                0.5 * BOX_INFLATION * lo.abs().max(1.0)
            };
            (lo - pad, hi + pad)
        })
        .collect()
}

/// Samples centers over the inflated empirical box of a trajectory. With
/// `normalize`, the box and centers live in z-scored coordinates.
pub fn dictionary_for(traj: &TrajectoryData, n_rbf: usize, seed: u64, normalize: bool) -> Result<LiftingDictionary> {
    let n = traj.state_dim();
    if normalize {
        let norm = Normalization::fit(&traj.states);
        let z = Mat::from_fn(traj.states.rows(), n, |i, j| {
            (traj.states[(i, j)] - norm.mean[j]) / norm.std[j]
        });
        let mut dict = sample_centers(n, n_rbf, &empirical_box(&z), seed)?;
        dict.normalization = Some(norm);
        Ok(dict)
    } else {
        sample_centers(n, n_rbf, &empirical_box(&traj.states), seed)
    }
}

/// Snapshot matrices: columns `k = 0..L-1` hold `psi(x_k)`, `psi(x_{k+1})`,
/// `u_k` and `y_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrices {
    pub theta: Mat,
    pub theta_plus: Mat,
    pub omega: Mat,
    pub y: Mat,
}

impl DataMatrices {
    pub fn samples(&self) -> usize {
        self.theta.cols()
    }

    /// `[Theta; Omega]`.
    pub fn stacked(&self) -> Mat {
        self.theta.vstack(&self.omega)
    }
}

pub fn build_matrices(traj: &TrajectoryData, dict: &LiftingDictionary) -> Result<DataMatrices> {
    if traj.state_dim() != dict.n {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} states, dictionary expects {}",
            traj.state_dim(),
            dict.n
        )));
    }
    if traj.states.rows() < 2 {
        return Err(Error::DimensionMismatch("need at least two state samples".into()));
    }
    let l = traj.steps();
    let big_n = dict.lifted_dim();
    let lifted: Vec<Vec<f64>> = (0..=l).map(|k| lift(dict, traj.states.row(k))).collect();
    let mut theta = Mat::zeros(big_n, l);
    let mut theta_plus = Mat::zeros(big_n, l);
    for k in 0..l {
        theta.set_column(k, &lifted[k]);
        theta_plus.set_column(k, &lifted[k + 1]);
    }
    let omega = traj.inputs.transpose();
    let y = traj.outputs.submatrix(0, 0, l, traj.output_dim()).transpose();
    Ok(DataMatrices {
        theta,
        theta_plus,
        omega,
        y,
    })
}
