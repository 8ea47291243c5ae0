use super::Mat;
use crate::error::{Error, Result};
use crate::tol;

/// Spectral decomposition `a = V diag(values) V^T` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEig {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: Mat,
    pub sweeps: usize,
    /// False when the sweep limit was hit; the fields hold the best iterate.
    pub converged: bool,
    off_diag: f64,
}

impl SymEig {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                sweeps: self.sweeps,
                off_diag: self.off_diag,
            })
        }
    }

    /// `V f(Λ) V^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Mat {
        let n = self.values.len();
        let v = &self.vectors;
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Mat::zeros(n, n);
        for k in 0..n {
            if fl[k] == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * fl[k];
                if vik == 0.0 {
                    continue;
                }
                for j in i..n {
                    out[(i, j)] += vik * v[(j, k)];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                out[(i, j)] = out[(j, i)];
            }
        }
        out
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig(a: &Mat) -> Result<SymEig> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let work = a.symmetrize();
    Ok(jacobi(work, Mat::identity(a.rows()), a.frobenius_norm()))
}

/// Jacobi started from an approximate eigenbasis `v0` (e.g. from the previous
/// iterate of a slowly varying matrix). `v0` is re-orthonormalized first.
pub fn sym_eig_warm(a: &Mat, v0: &Mat) -> Result<SymEig> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if v0.shape() != a.shape() {
        return Err(Error::DimensionMismatch("warm-start basis shape".into()));
    }
    let v = orthonormalize(v0);
    let sym = a.symmetrize();
    let rotated = &(&v.transpose() * &sym) * &v;
    Ok(jacobi(rotated.symmetrize(), v, a.frobenius_norm()))
}

fn jacobi(mut a: Mat, mut v: Mat, scale: f64) -> SymEig {
    let n = a.rows();
    let threshold = tol::JACOBI_OFF_DIAG * scale;
    let mut sweeps = 0;
    let mut converged = false;
    let mut off = max_off_diag(&a);
    while sweeps < tol::JACOBI_MAX_SWEEPS {
        if off < threshold || off == 0.0 {
            converged = true;
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < threshold {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        let np = c * akp - s * akq;
                        let nq = s * akp + c * akq;
                        a[(k, p)] = np;
                        a[(p, k)] = np;
                        a[(k, q)] = nq;
                        a[(q, k)] = nq;
                    }
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        off = max_off_diag(&a);
    }
    if !converged && (off < threshold || off == 0.0) {
        converged = true;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&k| a[(k, k)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        canonical_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    SymEig {
        values,
        vectors,
        sweeps,
        converged,
        off_diag: off,
    }
}

fn max_off_diag(a: &Mat) -> f64 {
    let n = a.rows();
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}

// Largest-magnitude component positive; ties go to the earliest index.
fn canonical_sign(col: &mut [f64]) {
    let big = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if big == 0.0 {
        return;
    }
    if let Some(lead) = col.iter().find(|v| v.abs() >= big * (1.0 - 1e-12)) {
        if *lead < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Modified Gram-Schmidt on the columns of a square matrix.
fn orthonormalize(v: &Mat) -> Mat {
    let n = v.rows();
    let mut out = v.clone();
    for j in 0..n {
        let mut col = out.column(j);
        for k in 0..j {
            let dot: f64 = (0..n).map(|i| out[(i, k)] * col[i]).sum();
            for (i, c) in col.iter_mut().enumerate() {
                *c -= dot * out[(i, k)];
            }
        }
        let norm = col.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-8 {
            // basis collapsed; fall back to a cold start
            return Mat::identity(n);
        }
        col.iter_mut().for_each(|c| *c /= norm);
        out.set_column(j, &col);
    }
    out
}

/// Frobenius-nearest positive semidefinite matrix, `V max(Λ, 0) V^T`.
pub fn psd_project(a: &Mat) -> Result<Mat> {
    Ok(sym_eig(a)?.reconstruct_with(|l| l.max(0.0)))
}

/// PSD projection that also returns the eigenbasis for warm-starting the next call.
pub fn psd_project_warm(a: &Mat, v0: Option<&Mat>) -> Result<(Mat, SymEig)> {
    let eig = match v0 {
        Some(v) => sym_eig_warm(a, v)?,
        None => sym_eig(a)?,
    };
    Ok((eig.reconstruct_with(|l| l.max(0.0)), eig))
}

/// Moore-Penrose pseudoinverse through the eigendecomposition of the smaller
/// Gram matrix. Singular values below `rcond * sigma_max` count as zero.
pub fn pinv(a: &Mat, rcond: f64) -> Result<Mat> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(Mat::zeros(n, m));
    }
    let wide = m <= n;
    let at = a.transpose();
    // wide: a a^T (m x m); tall: a^T a (n x n)
    let gram = if wide { at.gram() } else { a.gram() };
    let eig = sym_eig(&gram)?;
    let lmax = eig.max();
    if lmax <= 0.0 {
        return Ok(Mat::zeros(n, m));
    }
    let cut = lmax * (rcond * rcond).max(tol::GRAM_FLOOR);
    let ginv = eig.reconstruct_with(|l| if l > cut { 1.0 / l } else { 0.0 });
    Ok(if wide { &at * &ginv } else { &ginv * &at })
}

/// Number of eigenvalues of the smaller Gram matrix above `rel * lambda_max`.
pub fn gram_rank(a: &Mat, rel: f64) -> Result<usize> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(0);
    }
    let gram = if m <= n { a.transpose().gram() } else { a.gram() };
    let eig = sym_eig(&gram)?;
    let lmax = eig.max();
    if lmax <= 0.0 {
        return Ok(0);
    }
    Ok(eig.values.iter().filter(|&&l| l > rel * lmax).count())
}
