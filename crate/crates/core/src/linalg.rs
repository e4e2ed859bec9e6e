//! Small dense and tridiagonal kernels used by the FEM oracle, the coupling
//! estimator and the error bound.

use crate::error::{Error, Result};

/// Symmetric-or-not tridiagonal system `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`,
/// solved by the Thomas algorithm.
///
/// `lower` and `upper` have length `diag.len() - 1`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || lower.len() + 1 != n.max(1) || upper.len() + 1 != n.max(1) {
        return Err(Error::Argument(format!(
            "tridiagonal sizes disagree: diag {n}, lower {}, upper {}, rhs {}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let pivot_floor = f64::EPSILON * diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));

    let mut pivot = diag[0];
    if pivot.abs() <= pivot_floor {
        return Err(Error::Numerical("zero pivot in row 0".into()));
    }
    if n > 1 {
        c_prime[0] = upper[0] / pivot;
    }
    d_prime[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c_prime[i - 1];
        if pivot.abs() <= pivot_floor {
            return Err(Error::Numerical(format!("zero pivot in row {i}")));
        }
        if i < n - 1 {
            c_prime[i] = upper[i] / pivot;
        }
        d_prime[i] = (rhs[i] - lower[i - 1] * d_prime[i - 1]) / pivot;
    }

    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(x)
}

/// Dense Gaussian elimination with partial pivoting, row-major `N x N` matrix.
pub fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Result<[f64; N]> {
    let scale = a.iter().flat_map(|row| row.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
    let tiny = scale * 1e-13;

    for col in 0..N {
        let pivot_row = (col..N)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot_row][col].abs() <= tiny {
            return Err(Error::Numerical(format!("singular matrix at column {col}")));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);

        for row in col + 1..N {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            let pivot = a[col];
            for (x, p) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                *x -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let tail: f64 = (row + 1..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

/// Number of eigenvalues strictly less than `x` of the symmetric tridiagonal
/// matrix with diagonal `diag` and off-diagonal `off` (Sturm count).
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let off_sq = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - off_sq / d;
        if d == 0.0 {
            d = f64::MIN_POSITIVE;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of a symmetric tridiagonal matrix in ascending order, by
/// bisection on the Sturm sequence.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::Argument(format!(
            "symmetric tridiagonal needs diag of length n >= 1 and off of length n-1, got {n} and {}",
            off.len()
        )));
    }

    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let span = (hi - lo).max(hi.abs()).max(1e-300);
    lo -= 1e-12 * span;
    hi += 1e-12 * span;

    let mut eigenvalues = Vec::with_capacity(n);
    for k in 0..n {
        // smallest x with more than k eigenvalues below it
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if sturm_count(diag, off, mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        eigenvalues.push(0.5 * (a + b));
    }
    Ok(eigenvalues)
}
