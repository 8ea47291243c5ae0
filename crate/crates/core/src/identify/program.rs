use serde::{Deserialize, Serialize};

use super::admm::{dense_from_linear, solve_lmi_ls, AdmmOutcome, AdmmSettings, LmiLeastSquares, SparseMap};
use crate::error::{Error, Result};
use crate::matcore::{discrete_lyapunov, solve, spectral_radius_with, sym_eig, Lu, Mat};
use crate::tol;

/// Weighted fit of `G_A P` by `Q` under `[P - alpha I, Q; Q^T, P] >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NiProgram {
    pub g_a: Mat,
    pub g_b: Mat,
    pub w: Mat,
    pub alpha: f64,
    /// Sampling time, used only by the strict input refit.
    pub dt: f64,
    pub settings: AdmmSettings,
}

impl NiProgram {
    pub fn new(g_a: Mat, g_b: Mat, alpha: f64, dt: f64) -> Self {
        let n = g_a.rows();
        Self {
            g_a,
            g_b,
            w: Mat::identity(n),
            alpha,
            dt,
            settings: AdmmSettings::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.g_a.rows();
        if !self.g_a.is_square() || self.g_b.rows() != n || self.w.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "G_A {:?}, G_B {:?}, W {:?}",
                self.g_a.shape(),
                self.g_b.shape(),
                self.w.shape()
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if Lu::factor(&self.w).is_err() {
            return Err(Error::InvalidParameter("W must be nonsingular".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub primal_res: f64,
    pub dual_res: f64,
    pub eps_pri: f64,
    pub eps_dual: f64,
    pub objective: f64,
    pub lmi_min_eig: f64,
    pub residual_at_10: Option<f64>,
    pub final_residual: f64,
    /// Size of the post-hoc step along the feasibility direction.
    pub feasibility_shift: f64,
}

impl StageDiagnostics {
    fn from_outcome(o: &AdmmOutcome, objective: f64, scale: f64) -> Self {
        Self {
            iterations: o.iterations,
            converged: o.converged,
            primal_res: o.primal_res * scale,
            dual_res: o.dual_res * scale,
            eps_pri: o.eps_pri * scale,
            eps_dual: o.eps_dual * scale,
            objective,
            lmi_min_eig: o.lmi_min_eig * scale,
            residual_at_10: o.residual_at_10,
            final_residual: o.final_residual,
            feasibility_shift: o.shift * scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub primal_res: f64,
    pub dual_res: f64,
    pub objective: f64,
    pub lmi_min_eig: f64,
    pub stage1: StageDiagnostics,
    /// Present when the input matrix was refitted under the full certificate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict_refit: Option<StageDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiProgramSolution {
    #[serde(rename = "P")]
    pub p: Mat,
    #[serde(rename = "Q")]
    pub q: Mat,
    #[serde(rename = "B_d")]
    pub b_d: Mat,
    #[serde(rename = "A_d")]
    pub a_d: Mat,
    pub diagnostics: NiDiagnostics,
}

impl NiProgramSolution {
    pub fn require_converged(self) -> Result<Self> {
        if self.diagnostics.converged {
            Ok(self)
        } else {
            Err(Error::SolverNotConverged {
                iterations: self.diagnostics.iterations,
                primal_res: self.diagnostics.primal_res,
                dual_res: self.diagnostics.dual_res,
            })
        }
    }
}

fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Symmetric matrix from its upper triangle, row by row.
fn unpack_sym(n: usize, x: &[f64]) -> Mat {
    let mut p = Mat::zeros(n, n);
    let mut t = 0;
    for i in 0..n {
        for j in i..n {
            p[(i, j)] = x[t];
            p[(j, i)] = x[t];
            t += 1;
        }
    }
    p
}

fn pack_sym(p: &Mat) -> Vec<f64> {
    let n = p.rows();
    let mut x = Vec::with_capacity(tri_len(n));
    for i in 0..n {
        for j in i..n {
            x.push(0.5 * (p[(i, j)] + p[(j, i)]));
        }
    }
    x
}

fn unpack_pq(n: usize, x: &[f64]) -> (Mat, Mat) {
    let t = tri_len(n);
    let p = unpack_sym(n, &x[..t]);
    let q = Mat::from_row_slice(n, n, &x[t..]);
    (p, q)
}

fn lmi_block(p: &Mat, q: &Mat) -> Mat {
    Mat::block2(p, q, &q.transpose(), p)
}

fn alpha_offset(n: usize, alpha: f64) -> Mat {
    let mut e = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        e[(i, i)] = alpha;
    }
    e
}

/// `A_d = Q P^-1`.
fn recover_a(p: &Mat, q: &Mat) -> Result<Mat> {
    let min_eig = sym_eig(p)?.min();
    if min_eig <= crate::tol::SINGULAR_PIVOT * p.frobenius_norm() {
        return Err(Error::SingularP { min_eig });
    }
    Ok(solve(p, &q.transpose())?.transpose())
}

/// When `G_A` is Schur stable, `P` with `G_A P G_A^T - P + 2I = 0` and
/// `Q = G_A P` is strictly feasible with zero cost, hence optimal.
fn schur_start(g_a: &Mat) -> Result<Option<Vec<f64>>> {
    let n = g_a.rows();
    let rho = spectral_radius_with(g_a, tol::GELFAND_VERDICT_REL, tol::GELFAND_VERDICT_MAX_DOUBLINGS);
    if !(rho.converged && rho.value < 1.0 - tol::STABILITY_MARGIN) {
        return Ok(None);
    }
    let Ok(p) = discrete_lyapunov(g_a, &Mat::identity(n).scale(2.0)) else {
        return Ok(None);
    };
    let q = g_a * &p;
    if sym_eig(&(&lmi_block(&p, &q) - &alpha_offset(n, 1.0)))?.min() < 0.0 {
        return Ok(None);
    }
    Ok(Some(pack_sym(&p).into_iter().chain(q.into_vec()).collect()))
}

/// Solves the NI-constrained program. The program is homogeneous in
/// `(P, Q)`, so it is solved with unit margin and rescaled by `alpha`.
/// `B_d` is the unconstrained fit `G_B`.
pub fn solve_ni(prog: &NiProgram) -> Result<NiProgramSolution> {
    prog.validate()?;
    let n = prog.g_a.rows();
    let np = tri_len(n) + n * n;
    let s = SparseMap::from_linear(np, 2 * n, |x| {
        let (p, q) = unpack_pq(n, x);
        lmi_block(&p, &q)
    });
    let f = dense_from_linear(np, |x| {
        let (p, q) = unpack_pq(n, x);
        (&prog.w * &(&(&prog.g_a * &p) - &q)).into_vec()
    });
    let g = vec![0.0; n * n];
    let e = alpha_offset(n, 1.0);
    // P + cI lifts every eigenvalue of the block matrix by c
    let dir: Vec<f64> = pack_sym(&Mat::identity(n)).into_iter().chain(vec![0.0; n * n]).collect();
    let x0 = schur_start(&prog.g_a)?;
    let total = solve_lmi_ls(
        &LmiLeastSquares {
            f: &f,
            g: &g,
            s: &s,
            e: &e,
            x0: x0.as_deref(),
            direction: Some(&dir),
        },
        &prog.settings,
    )?;
    let (p1, q1) = unpack_pq(n, &total.x);
    let p = p1.scale(prog.alpha);
    let q = q1.scale(prog.alpha);
    let a_d = recover_a(&p, &q)?;
    let objective = (&prog.w * &(&(&prog.g_a * &p) - &q)).frobenius_norm().powi(2);
    let stage1 = StageDiagnostics::from_outcome(&total, objective, prog.alpha);
    Ok(NiProgramSolution {
        p,
        q,
        b_d: prog.g_b.clone(),
        a_d,
        diagnostics: NiDiagnostics {
            iterations: stage1.iterations,
            converged: stage1.converged,
            primal_res: stage1.primal_res,
            dual_res: stage1.dual_res,
            objective,
            lmi_min_eig: stage1.lmi_min_eig,
            stage1,
            strict_refit: None,
        },
    })
}

/// Enforces the input-matrix equality of the NI certificate,
/// `B_d = -(1/T)(A_d - I) P (I + A_d^T)^-1 C_d^T`, keeping `A_d` fixed.
///
/// `B_d` is linear in `P`, so `P` is refitted to bring the implied `B_d` as
/// close as possible to `G_B` (weighted by `W`) while `[P - alpha I, A_d P;
/// P A_d^T, P] >= 0` keeps holding. The previous `P` serves as the
/// feasibility direction.
pub fn refit_strict_b(prog: &NiProgram, sol: &NiProgramSolution, c_d: &Mat) -> Result<NiProgramSolution> {
    prog.validate()?;
    let n = prog.g_a.rows();
    if c_d.cols() != n || c_d.rows() != prog.g_b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "C_d is {:?}; a square system with {n} states is needed",
            c_d.shape()
        )));
    }
    let a_d = &sol.a_d;
    let dt = prog.dt;
    let np = tri_len(n);
    let s = SparseMap::from_linear(np, 2 * n, |x| {
        let p = unpack_sym(n, x);
        lmi_block(&p, &(a_d * &p))
    });
    let lu = Lu::factor(&(&Mat::identity(n) + &a_d.transpose())).map_err(|_| Error::SingularAtMinusOne)?;
    let right = lu.solve(&c_d.transpose());
    let left = (a_d - &Mat::identity(n)).scale(-1.0 / dt);
    let bmap = |p: &Mat| &(&left * p) * &right;
    let f = dense_from_linear(np, |x| (&prog.w * &bmap(&unpack_sym(n, x))).into_vec());
    let g = (&prog.w * &prog.g_b).into_vec();
    let e = alpha_offset(n, prog.alpha);
    let x0 = pack_sym(&sol.p);
    let out = solve_lmi_ls(
        &LmiLeastSquares {
            f: &f,
            g: &g,
            s: &s,
            e: &e,
            x0: None,
            direction: Some(&x0),
        },
        &prog.settings,
    )?;
    let p = unpack_sym(n, &out.x);
    let q = a_d * &p;
    let b_d = bmap(&p);
    let objective = (&prog.w * &(&prog.g_b - &b_d)).frobenius_norm().powi(2);
    let refit = StageDiagnostics::from_outcome(&out, objective, 1.0);
    let mut diagnostics = sol.diagnostics.clone();
    diagnostics.iterations += refit.iterations;
    diagnostics.converged &= refit.converged;
    diagnostics.primal_res = diagnostics.primal_res.max(refit.primal_res);
    diagnostics.dual_res = diagnostics.dual_res.max(refit.dual_res);
    diagnostics.objective = (&prog.w * &(&(&prog.g_a * &p) - &q)).frobenius_norm().powi(2);
    diagnostics.lmi_min_eig = refit.lmi_min_eig;
    diagnostics.strict_refit = Some(refit);
    Ok(NiProgramSolution {
        p,
        q,
        b_d,
        a_d: a_d.clone(),
        diagnostics,
    })
}
