//! ADMM for linear least squares over a linear matrix inequality:
//!
//! ```text
//! minimize ||F x - g||^2   subject to   S(x) - E  is positive semidefinite
//! ```
//!
//! with `S` linear from R^p into symmetric k x k matrices.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matcore::{psd_project_warm, sym_eig, Lu, Mat};
use crate::tol;

/// Sparse linear map from R^p into k x k matrices, stored by column.
#[derive(Debug, Clone)]
pub(crate) struct SparseMap {
    k: usize,
    cols: Vec<Vec<(usize, f64)>>,
}

impl SparseMap {
    /// Samples a linear map on the unit vectors of R^p.
    pub(crate) fn from_linear(p: usize, k: usize, f: impl Fn(&[f64]) -> Mat) -> Self {
        let mut e = vec![0.0; p];
        let cols = (0..p)
            .map(|t| {
                e[t] = 1.0;
                let m = f(&e);
                e[t] = 0.0;
                debug_assert_eq!(m.shape(), (k, k));
                m.as_slice()
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, v)| (i, *v))
                    .collect()
            })
            .collect();
        Self { k, cols }
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.k, self.k);
        let d = out.as_mut_slice();
        for (col, &xt) in self.cols.iter().zip(x) {
            if xt != 0.0 {
                for &(i, v) in col {
                    d[i] += v * xt;
                }
            }
        }
        out
    }

    pub(crate) fn adjoint(&self, z: &Mat) -> Vec<f64> {
        let d = z.as_slice();
        self.cols
            .iter()
            .map(|col| col.iter().map(|&(i, v)| v * d[i]).sum())
            .collect()
    }

    fn normal(&self) -> Mat {
        let p = self.cols.len();
        let mut dense = vec![0.0; self.k * self.k];
        let mut out = Mat::zeros(p, p);
        for b in 0..p {
            for &(i, v) in &self.cols[b] {
                dense[i] = v;
            }
            for a in 0..=b {
                let s: f64 = self.cols[a].iter().map(|&(i, v)| v * dense[i]).sum();
                out[(a, b)] = s;
                out[(b, a)] = s;
            }
            for &(i, _) in &self.cols[b] {
                dense[i] = 0.0;
            }
        }
        out
    }
}

/// Dense matrix of a linear map R^p -> R^r sampled on unit vectors.
pub(crate) fn dense_from_linear(p: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Mat {
    let mut e = vec![0.0; p];
    let mut cols = Vec::with_capacity(p);
    for t in 0..p {
        e[t] = 1.0;
        cols.push(f(&e));
        e[t] = 0.0;
    }
    let r = cols.first().map_or(0, Vec::len);
    Mat::from_fn(r, p, |i, j| cols[j][i])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmSettings {
    /// Initial penalty; `None` picks one from the problem data.
    pub rho: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
    /// Over-relaxation factor in (0, 2).
    pub relaxation: f64,
    /// Penalty rebalancing period; 0 disables it.
    pub adapt_every: usize,
    /// Anderson acceleration memory; 0 disables it.
    pub anderson: usize,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self {
            rho: None,
            tol: tol::ADMM_TOL,
            max_iters: tol::ADMM_MAX_ITERS,
            relaxation: 1.6,
            adapt_every: 25,
            anderson: 8,
        }
    }
}

pub(crate) struct LmiLeastSquares<'a> {
    pub f: &'a Mat,
    pub g: &'a [f64],
    pub s: &'a SparseMap,
    pub e: &'a Mat,
    pub x0: Option<&'a [f64]>,
    /// A point `d` with `S(d)` positive definite, used to restore feasibility.
    pub direction: Option<&'a [f64]>,
}

#[derive(Debug, Clone)]
pub(crate) struct AdmmOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub primal_res: f64,
    pub dual_res: f64,
    pub eps_pri: f64,
    pub eps_dual: f64,
    pub residual_at_10: Option<f64>,
    pub final_residual: f64,
    /// `lambda_min(S(x) - E)` after the feasibility shift.
    pub lmi_min_eig: f64,
    pub shift: f64,
    pub z: Mat,
    /// Unscaled multiplier, `rho U`.
    pub y: Mat,
}

impl AdmmOutcome {
    pub(crate) fn empty() -> Self {
        Self {
            x: Vec::new(),
            iterations: 0,
            converged: false,
            primal_res: f64::INFINITY,
            dual_res: f64::INFINITY,
            eps_pri: 0.0,
            eps_dual: 0.0,
            residual_at_10: None,
            final_residual: f64::INFINITY,
            lmi_min_eig: f64::NEG_INFINITY,
            shift: 0.0,
            z: Mat::zeros(0, 0),
            y: Mat::zeros(0, 0),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// Extrapolated points may raise the fixed-point residual this much before
// the plain iterate is restored.
const SAFEGUARD: f64 = 10.0;

pub(crate) fn solve_lmi_ls(prob: &LmiLeastSquares<'_>, cfg: &AdmmSettings) -> Result<AdmmOutcome> {
    let p = prob.s.cols.len();
    let ftf2 = prob.f.gram().scale(2.0);
    let ftg2: Vec<f64> = prob.f.tr_mul_vec(prob.g).iter().map(|v| 2.0 * v).collect();
    let sts = prob.s.normal();

    let mut rho = cfg.rho.unwrap_or_else(|| {
        let (a, b) = (ftf2.trace(), sts.trace());
        if a > 0.0 && b > 0.0 {
            a / b
        } else {
            1.0
        }
    });
    let factor = |rho: f64| Lu::factor(&(&ftf2 + &sts.scale(rho)));
    let mut lu = factor(rho)?;

    let mut x = prob.x0.map_or_else(|| vec![0.0; p], <[f64]>::to_vec);
    let sx0 = &prob.s.apply(&x) - prob.e;
    let (mut z, eig0) = psd_project_warm(&sx0, None)?;
    let mut basis = eig0.vectors;
    let k = z.rows();
    let mut u = Mat::zeros(k, k);
    let e_norm = prob.e.frobenius_norm();

    let mut out = AdmmOutcome::empty();

    let a = cfg.relaxation;
    let kk = k * k;
    let mut accel = Anderson::new(cfg.anderson);
    // last plain ADMM image and its fixed-point residual, for the safeguard
    let mut fallback: Option<(Mat, Mat, f64)> = None;
    let mut extrapolated = false;
    for it in 1..=cfg.max_iters {
        let target = &(&z + prob.e) - &u;
        let st = prob.s.adjoint(&target);
        let rhs: Vec<f64> = ftg2.iter().zip(&st).map(|(f, s)| f + rho * s).collect();
        x = lu.solve_vec(&rhs);

        let sx = prob.s.apply(&x);
        let shifted = &sx - prob.e;
        let relaxed = &shifted.scale(a) + &z.scale(1.0 - a);
        let (z_new, eig) = psd_project_warm(&(&relaxed + &u), Some(&basis))?;
        basis = eig.vectors;
        let u_new = &(&u + &relaxed) - &z_new;

        let primal = (&shifted - &z_new).frobenius_norm();
        let dual = rho * norm(&prob.s.adjoint(&(&z_new - &z)));
        let eps_pri = cfg.tol * 1f64.max(sx.frobenius_norm()).max(e_norm).max(z_new.frobenius_norm());
        let grad = norm(&ftf2.mul_vec(&x)).max(norm(&ftg2));
        let eps_dual = cfg.tol * 1f64.max(rho * norm(&prob.s.adjoint(&u_new))).max(grad);

        out.iterations = it;
        out.primal_res = primal;
        out.dual_res = dual;
        out.eps_pri = eps_pri;
        out.eps_dual = eps_dual;
        out.final_residual = primal.hypot(dual);
        if it == 10 {
            out.residual_at_10 = Some(out.final_residual);
        }
        if primal <= eps_pri && dual <= eps_dual {
            out.converged = true;
            break;
        }

        let fp_res = (&z_new - &z).frobenius_norm().hypot((&u_new - &u).frobenius_norm());
        if extrapolated {
            if let Some((fz, fu, prev_res)) = fallback.take() {
                if fp_res > SAFEGUARD * prev_res {
                    // extrapolation made things worse: resume from the plain image
                    accel.reset();
                    z = fz;
                    u = fu;
                    extrapolated = false;
                    continue;
                }
            }
        }

        let mut rho_changed = false;
        let (mut z_next, mut u_next) = (z_new, u_new);
        if cfg.adapt_every > 0 && it % cfg.adapt_every == 0 {
            let (rp, rd) = (primal / eps_pri, dual / eps_dual);
            let new_rho = if rp > 2.0 * rd {
                rho * 2.0
            } else if rd > 2.0 * rp {
                rho * 0.5
            } else {
                rho
            };
            if new_rho != rho {
                u_next = u_next.scale(rho / new_rho);
                rho = new_rho;
                lu = factor(rho)?;
                rho_changed = true;
            }
        }
        if rho_changed || cfg.anderson == 0 {
            accel.reset();
            extrapolated = false;
            z = z_next;
            u = u_next;
            continue;
        }

        let state: Vec<f64> = z.as_slice().iter().chain(u.as_slice()).copied().collect();
        let image: Vec<f64> = z_next.as_slice().iter().chain(u_next.as_slice()).copied().collect();
        match accel.step(&state, &image) {
            Some(next) => {
                fallback = Some((z_next, u_next, fp_res));
                z_next = Mat::from_row_slice(k, k, &next[..kk]).symmetrize();
                u_next = Mat::from_row_slice(k, k, &next[kk..]).symmetrize();
                extrapolated = true;
            }
            None => extrapolated = false,
        }
        z = z_next;
        u = u_next;
    }

    out.y = u.scale(rho);
    out.z = z;
    let lmi = |x: &[f64]| -> Result<f64> { Ok(sym_eig(&(&prob.s.apply(x) - prob.e))?.min()) };
    let mut min_eig = lmi(&x)?;
    if min_eig < 0.0 {
        if let Some(d) = prob.direction {
            let lam_d = sym_eig(&prob.s.apply(d))?.min();
            if lam_d > 0.0 {
                let margin = 1e-12 * (1.0 + prob.s.apply(&x).frobenius_norm());
                let t = (margin - min_eig) / lam_d;
                x.iter_mut().zip(d).for_each(|(xi, di)| *xi += t * di);
                out.shift = t;
                min_eig = lmi(&x)?;
            }
        }
    }
    out.lmi_min_eig = min_eig;
    out.x = x;
    Ok(out)
}

/// Type-II Anderson acceleration of a fixed-point map `s -> T(s)`.
struct Anderson {
    memory: usize,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    ds: VecDeque<Vec<f64>>,
    dg: VecDeque<Vec<f64>>,
}

impl Anderson {
    fn new(memory: usize) -> Self {
        Self {
            memory,
            prev: None,
            ds: VecDeque::new(),
            dg: VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        self.prev = None;
        self.ds.clear();
        self.dg.clear();
    }

    /// Extrapolated next point, or `None` while the history is empty.
    fn step(&mut self, s: &[f64], t: &[f64]) -> Option<Vec<f64>> {
        let g: Vec<f64> = t.iter().zip(s).map(|(a, b)| a - b).collect();
        if let Some((sp, gp)) = self.prev.take() {
            self.ds.push_back(s.iter().zip(&sp).map(|(a, b)| a - b).collect());
            self.dg.push_back(g.iter().zip(&gp).map(|(a, b)| a - b).collect());
            if self.ds.len() > self.memory {
                self.ds.pop_front();
                self.dg.pop_front();
            }
        }
        self.prev = Some((s.to_vec(), g.clone()));
        let m = self.dg.len();
        if m == 0 {
            return None;
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut gram = Mat::from_fn(m, m, |i, j| dot(&self.dg[i], &self.dg[j]));
        let reg = 1e-10 * gram.trace().max(1e-300);
        for i in 0..m {
            gram[(i, i)] += reg;
        }
        let rhs: Vec<f64> = self.dg.iter().map(|d| dot(d, &g)).collect();
        let gamma = match Lu::factor(&gram) {
            Ok(lu) => lu.solve_vec(&rhs),
            Err(_) => {
                self.reset();
                return None;
            }
        };
        let mut next = t.to_vec();
        for (i, gi) in gamma.iter().enumerate() {
            for ((v, a), b) in next.iter_mut().zip(&self.ds[i]).zip(&self.dg[i]) {
                *v -= gi * (a + b);
            }
        }
        next.iter().all(|v| v.is_finite()).then_some(next)
    }
}
