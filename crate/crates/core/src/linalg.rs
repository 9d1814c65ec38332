//! Dense linear algebra used by the reservoir and the stability checks.

use nalgebra::{DMatrix, Schur, SVD};

use crate::error::{invalid, Result};

pub type Matrix = DMatrix<f64>;

const MAX_QR_ITERS: usize = 100_000;

fn check_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid("matrix has non-finite entries"))
    }
}

fn check_square(m: &Matrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(invalid(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Largest eigenvalue modulus, via a real Schur decomposition (Hessenberg
/// reduction followed by shifted QR), so complex conjugate pairs are resolved
/// from their 2x2 diagonal blocks.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    check_square(m)?;
    check_finite(m)?;
    if m.is_empty() {
        return Ok(0.0);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, MAX_QR_ITERS)
        .ok_or_else(|| invalid("Schur iteration did not converge"))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(0.0);
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, MAX_QR_ITERS)
        .ok_or_else(|| invalid("SVD iteration did not converge"))?;
    Ok(svd.singular_values.iter().copied().fold(0.0, f64::max))
}

/// `out = m * x`, accumulated column by column in a fixed order.
pub fn mat_vec_into(m: &Matrix, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.ncols(), x.len());
    debug_assert_eq!(m.nrows(), out.len());
    out.iter_mut().for_each(|o| *o = 0.0);
    let rows = m.nrows();
    for (col, &xj) in m.as_slice().chunks_exact(rows).zip(x) {
        if xj == 0.0 {
            continue;
        }
        for (o, &a) in out.iter_mut().zip(col) {
            *o += a * xj;
        }
    }
}

/// `out = mᵀ * x`.
pub fn mat_t_vec_into(m: &Matrix, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.nrows(), x.len());
    debug_assert_eq!(m.ncols(), out.len());
    let rows = m.nrows();
    for (o, col) in out.iter_mut().zip(m.as_slice().chunks_exact(rows)) {
        *o = col.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Leading singular triple `(sigma, u, v)` by power iteration on `mᵀm`,
/// started from `v0`. Stops once sigma changes by less than `rel_tol`
/// relative, or after `max_iters` sweeps.
pub fn top_singular_triple(
    m: &Matrix,
    v0: &[f64],
    max_iters: usize,
    rel_tol: f64,
) -> (f64, Vec<f64>, Vec<f64>) {
    let (rows, cols) = m.shape();
    let mut v = v0.to_vec();
    let n = norm2(&v);
    if n == 0.0 {
        v.iter_mut().for_each(|x| *x = 1.0 / (cols as f64).sqrt());
    } else {
        v.iter_mut().for_each(|x| *x /= n);
    }
    let mut u = vec![0.0; rows];
    let mut sigma = 0.0;
    for _ in 0..max_iters.max(1) {
        mat_vec_into(m, &v, &mut u);
        let s = norm2(&u);
        if s == 0.0 {
            return (0.0, u, v);
        }
        u.iter_mut().for_each(|x| *x /= s);
        mat_t_vec_into(m, &u, &mut v);
        let t = norm2(&v);
        v.iter_mut().for_each(|x| *x /= t);
        let converged = (t - sigma).abs() <= rel_tol * t;
        sigma = t;
        if converged {
            break;
        }
    }
    (sigma, u, v)
}
