use num_complex::Complex64;

use super::{CMat, Mat};
use crate::error::{Error, Result};
use crate::tol;

/// LU factorization with partial pivoting, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Mat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NonSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let threshold = tol::SINGULAR_PIVOT * a.inf_norm();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= threshold || pivot == 0.0 {
                return Err(Error::Singular { pivot, threshold });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    pub fn solve(&self, b: &Mat) -> Mat {
        assert_eq!(b.rows(), self.n);
        let mut out = Mat::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            out.set_column(j, &self.solve_vec(&b.column(j)));
        }
        out
    }
}

/// Solves `a x = b` by partial-pivot elimination.
pub fn solve(a: &Mat, b: &Mat) -> Result<Mat> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "solve: a is {}x{}, b has {} rows",
            a.rows(),
            a.cols(),
            b.rows()
        )));
    }
    Ok(Lu::factor(a)?.solve(b))
}

/// `a^{-1}`.
pub fn inverse(a: &Mat) -> Result<Mat> {
    solve(a, &Mat::identity(a.rows()))
}

/// Complex solve through the real embedding `[[Re, -Im], [Im, Re]]`.
pub fn csolve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.rows() != a.cols() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch("csolve: row count".into()));
    }
    let (ar, ai) = (a.re(), a.im());
    let big = Mat::block2(&ar, &ai.scale(-1.0), &ai, &ar);
    let rhs = b.re().vstack(&b.im());
    let x = solve(&big, &rhs)?;
    let n = a.rows();
    let mut out = CMat::zeros(n, b.cols());
    for i in 0..n {
        for j in 0..b.cols() {
            out[(i, j)] = Complex64::new(x[(i, j)], x[(n + i, j)]);
        }
    }
    Ok(out)
}
