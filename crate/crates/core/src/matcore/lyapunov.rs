use super::{solve, Mat};
use crate::error::{Error, Result};

/// Solves `A X A^T - X + Q = 0` through the Kronecker form
/// `(I - A (x) A) vec(X) = vec(Q)`. Needs no eigenvalue pair of `A` with
/// product 1; the solution is symmetric when `Q` is.
pub fn discrete_lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if q.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("Q is {:?}, A is {n}x{n}", q.shape())));
    }
    let nn = n * n;
    let k = Mat::from_fn(nn, nn, |r, c| {
        let (i, j) = (r / n, r % n);
        let (k, l) = (c / n, c % n);
        let id = if r == c { 1.0 } else { 0.0 };
        id - a[(i, k)] * a[(j, l)]
    });
    let x = solve(&k, &Mat::column_vector(q.as_slice()))?;
    Ok(Mat::from_row_slice(n, n, x.as_slice()).symmetrize())
}
