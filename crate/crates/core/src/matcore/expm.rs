use super::Mat;

// Taylor terms after scaling; with ||A / 2^s||_1 <= 1/2 the remainder is
// below 1e-17.
const TAYLOR_TERMS: usize = 18;

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &Mat) -> Mat {
    assert!(a.is_square(), "exponential of a non-square matrix");
    let n = a.rows();
    let norm = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as i32;
    }
    let scaled = a.scale(0.5f64.powi(squarings));
    let mut sum = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=TAYLOR_TERMS {
        term = (&term * &scaled).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
