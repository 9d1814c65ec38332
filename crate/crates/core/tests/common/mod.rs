//! Reference computations that share no code with the library: plain nested
//! `Vec`s, characteristic polynomials and root finding instead of Schur/SVD.
#![allow(dead_code)]

use num_complex::Complex64;

pub type Dense = Vec<Vec<f64>>;

pub fn from_nalgebra(m: &esplab::linalg::Matrix) -> Dense {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            for j in 0..m {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Dense) -> Dense {
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j]).collect())
        .collect()
}

/// Monic characteristic polynomial coefficients, highest degree first,
/// by the Faddeev-LeVerrier recursion.
pub fn char_poly(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![1.0];
    let mut m = vec![vec![0.0; n]; n];
    let mut c_prev = 1.0;
    for k in 1..=n {
        let mut next = matmul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c_prev;
        }
        m = next;
        let am = matmul(a, &m);
        let tr: f64 = (0..n).map(|i| am[i][i]).sum();
        c_prev = -tr / k as f64;
        coeffs.push(c_prev);
    }
    coeffs
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of a monic polynomial by Durand-Kerner, then Newton polishing.
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let bound = 1.0 + coeffs[1..].iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32 + 1) * bound).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            let step = horner(coeffs, z[i]).0 / denom;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..5 {
            let (p, dp) = horner(coeffs, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            *zi -= p / dp;
        }
    }
    z
}

pub fn eigenvalues(a: &Dense) -> Vec<Complex64> {
    poly_roots(&char_poly(a))
}

pub fn spectral_radius(a: &Dense) -> f64 {
    eigenvalues(a).iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest singular value as the square root of the largest eigenvalue of
/// `A^T A`.
pub fn spectral_norm(a: &Dense) -> f64 {
    let g = matmul(&transpose(a), a);
    eigenvalues(&g)
        .iter()
        .fold(0.0f64, |m, z| m.max(z.re))
        .max(0.0)
        .sqrt()
}

/// `x = tanh(w x)` iterated from 1 until it stops moving.
pub fn scalar_fixed_point(w: f64) -> f64 {
    let mut x = 1.0f64;
    for _ in 0..100_000 {
        let next = (w * x).tanh();
        if (next - x).abs() < 1e-16 {
            return next;
        }
        x = next;
    }
    x
}

fn norm_2x2(m: [[f64; 2]; 2]) -> f64 {
    let t = m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    ((t + (t * t - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
}

/// `min over d > 0 of ||diag(1, d) W diag(1, 1/d)||_2` for a 2x2 `W`,
/// by a coarse log-grid scan refined with golden-section search.
pub fn min_scaled_norm_2x2(w: [[f64; 2]; 2]) -> (f64, f64) {
    let f = |s: f64| {
        let d = s.exp();
        norm_2x2([[w[0][0], w[0][1] / d], [w[1][0] * d, w[1][1]]])
    };
    let (lo, hi, n) = (-20.0, 20.0, 4000);
    let h = (hi - lo) / n as f64;
    let best = (0..=n)
        .map(|i| lo + i as f64 * h)
        .fold(lo, |b, s| if f(s) < f(b) { s } else { b });
    let (mut a, mut b) = (best - h, best + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let s = (a + b) / 2.0;
    (f(s), s.exp())
}
