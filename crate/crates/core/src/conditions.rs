//! Literature conditions for the echo state property.
//!
//! * necessary: `rho(W) < 1`;
//! * sufficient (either suffices): `W` diagonally Schur stable, or the
//!   input-driven bound `limsup (1/t) sum (C(t) - (1 + ln 2)) I{C(t) >= 2} > ln(||W||_2) / 2`
//!   with `C(t) = min_i |(W_in u(t))_i|`.
//!
//! Diagonal Schur stability is decided one-sidedly: we search for a positive
//! diagonal `D` with `||D W D^-1||_2 <= 1 - eps`. Failing to find one yields
//! [`SchurStatus::Unknown`], which says nothing about instability.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Result};
use crate::linalg::{self, Matrix};
use crate::reservoir::{ReservoirParams, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchurStatus {
    Certified,
    Unknown,
}

impl fmt::Display for SchurStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchurStatus::Certified => "certified",
            SchurStatus::Unknown => "unknown",
        })
    }
}

impl FromStr for SchurStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "certified" => Ok(SchurStatus::Certified),
            "unknown" => Ok(SchurStatus::Unknown),
            other => Err(format!("unknown schur status {other:?}")),
        }
    }
}

/// Settings for the diagonal-scaling search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateSearch {
    /// Descent iterations per restart.
    pub max_iters: usize,
    /// Required margin: certify only when `||D W D^-1||_2 <= 1 - eps`.
    pub eps: f64,
}

impl Default for CertificateSearch {
    fn default() -> Self {
        CertificateSearch {
            max_iters: 500,
            eps: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurCertificate {
    pub status: SchurStatus,
    /// Positive diagonal of `D` when certified.
    pub diagonal: Option<Vec<f64>>,
    /// Verified `||D W D^-1||_2` for the certificate.
    pub scaled_norm: Option<f64>,
}

impl SchurCertificate {
    fn unknown() -> Self {
        SchurCertificate {
            status: SchurStatus::Unknown,
            diagonal: None,
            scaled_norm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputCondition {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub c_series: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub spectral_radius: f64,
    pub spectral_norm: f64,
    pub necessary_holds: bool,
    pub schur_status: SchurStatus,
    pub schur_certificate: Option<Vec<f64>>,
    pub input_condition_holds: bool,
    pub input_condition_lhs: f64,
    pub input_condition_rhs: f64,
    pub c_series: Vec<f64>,
}

impl ConditionReport {
    /// Either sufficient condition holds.
    pub fn sufficient_holds(&self) -> bool {
        self.schur_status == SchurStatus::Certified || self.input_condition_holds
    }
}

pub fn necessary_condition(w: &Matrix) -> Result<bool> {
    Ok(linalg::spectral_radius(w)? < 1.0)
}

/// `D W D^-1` for `D = diag(d)`.
pub fn diagonal_similarity(w: &Matrix, d: &[f64]) -> Matrix {
    Matrix::from_fn(w.nrows(), w.ncols(), |i, j| d[i] * w[(i, j)] / d[j])
}

fn perron_vector(a: &Matrix, transpose: bool) -> Vec<f64> {
    let n = a.nrows();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    for _ in 0..1000 {
        if transpose {
            linalg::mat_t_vec_into(a, &x, &mut y);
        } else {
            linalg::mat_vec_into(a, &x, &mut y);
        }
        // Shift by x keeps the iteration convergent on periodic patterns.
        y.iter_mut().zip(&x).for_each(|(yi, xi)| *yi += xi);
        let nrm = linalg::norm2(&y);
        let diff: f64 = y.iter().zip(&x).map(|(a, b)| (a / nrm - b).abs()).sum();
        x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi = yi / nrm);
        if diff < 1e-13 {
            break;
        }
    }
    x
}

/// Restart points, as log-diagonals. The first comes from the Perron vectors
/// of `|W|` (`d_i = sqrt(l_i / r_i)`, which makes `||D|W|D^-1||_2 = rho(|W|)`),
/// then the identity, then linear ramps `a * (i/(n-1) - 1/2)` with `a` on the
/// log grid `{+-ln 10, +-2 ln 10}`.
fn restart_points(w: &Matrix) -> Vec<Vec<f64>> {
    let n = w.nrows();
    let abs = w.map(f64::abs);
    let r = perron_vector(&abs, false);
    let l = perron_vector(&abs, true);
    let mut starts = Vec::new();
    if r.iter().chain(&l).all(|&v| v > 1e-300) {
        starts.push(
            r.iter()
                .zip(&l)
                .map(|(ri, li)| 0.5 * (li / ri).ln())
                .collect(),
        );
    }
    starts.push(vec![0.0; n]);
    if n > 1 {
        for a in [1.0, -1.0, 2.0, -2.0] {
            let a = a * std::f64::consts::LN_10;
            starts.push(
                (0..n)
                    .map(|i| a * (i as f64 / (n - 1) as f64 - 0.5))
                    .collect(),
            );
        }
    }
    starts
}

fn exp_centered(logd: &[f64]) -> Vec<f64> {
    let mean = logd.iter().sum::<f64>() / logd.len() as f64;
    logd.iter().map(|v| (v - mean).exp()).collect()
}

/// Searches for a positive diagonal `D` with `||D W D^-1||_2 <= 1 - eps`.
///
/// Each restart runs a descent on `log D` using the gradient of the top
/// singular value, `sigma * (u_i^2 - v_i^2)`, with a multiplicative update
/// `d_i <- d_i * exp(-step * (u_i^2 - v_i^2))` and step-size backtracking.
/// A candidate is accepted only after an SVD re-check.
pub fn schur_certificate_search(
    w: &Matrix,
    search: &CertificateSearch,
) -> Result<SchurCertificate> {
    if !(search.eps > 0.0 && search.eps < 1.0) {
        return Err(invalid(format!(
            "eps must lie in (0, 1), got {}",
            search.eps
        )));
    }
    let rho = linalg::spectral_radius(w)?;
    let target = 1.0 - search.eps;
    // rho(W) <= ||D W D^-1||_2 for every D, so nothing can certify past this.
    if rho > target {
        return Ok(SchurCertificate::unknown());
    }
    let n = w.nrows();
    let verify = |logd: &[f64]| -> Result<Option<SchurCertificate>> {
        let d = exp_centered(logd);
        let norm = linalg::spectral_norm(&diagonal_similarity(w, &d))?;
        Ok((norm <= target).then_some(SchurCertificate {
            status: SchurStatus::Certified,
            diagonal: Some(d),
            scaled_norm: Some(norm),
        }))
    };

    for start in restart_points(w) {
        let mut logd = start;
        let m = diagonal_similarity(w, &exp_centered(&logd));
        let (mut sigma, mut u, mut v) = linalg::top_singular_triple(&m, &vec![1.0; n], 300, 1e-12);
        let mut step = 1.0;
        let mut best_checkpoint = sigma;
        for iter in 0..search.max_iters {
            if sigma <= target {
                if let Some(cert) = verify(&logd)? {
                    return Ok(cert);
                }
            }
            let grad: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a * a - b * b).collect();
            if linalg::norm2(&grad) < 1e-14 {
                break;
            }
            let trial: Vec<f64> = logd.iter().zip(&grad).map(|(l, g)| l - step * g).collect();
            let mt = diagonal_similarity(w, &exp_centered(&trial));
            let (st, ut, vt) = linalg::top_singular_triple(&mt, &v, 300, 1e-12);
            if st < sigma {
                logd = trial;
                sigma = st;
                u = ut;
                v = vt;
                step *= 1.5;
            } else {
                step *= 0.5;
                if step < 1e-10 {
                    break;
                }
            }
            // Stall detection every 25 iterations.
            if iter % 25 == 24 {
                if sigma > best_checkpoint * (1.0 - 1e-6) {
                    break;
                }
                best_checkpoint = sigma;
            }
        }
        if sigma <= target {
            if let Some(cert) = verify(&logd)? {
                return Ok(cert);
            }
        }
    }
    Ok(SchurCertificate::unknown())
}

/// The input-driven sufficient condition, with the limsup replaced by the
/// average over the first `horizon` steps and `||W||` the spectral norm.
pub fn input_dependent_sufficient(
    p: &ReservoirParams,
    s: &Signal,
    horizon: usize,
) -> Result<InputCondition> {
    if horizon == 0 {
        return Err(invalid("horizon must be positive"));
    }
    p.check_signal(s)?;
    if horizon > s.len() {
        return Err(invalid(format!(
            "horizon {} exceeds signal length {}",
            horizon,
            s.len()
        )));
    }
    let threshold = 1.0 + std::f64::consts::LN_2;
    let mut drive = vec![0.0; p.n_r()];
    let c_series: Vec<f64> = s
        .steps()
        .take(horizon)
        .map(|u| {
            linalg::mat_vec_into(p.w_in(), u, &mut drive);
            drive.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()))
        })
        .collect();
    let lhs = c_series
        .iter()
        .map(|&c| if c >= 2.0 { c - threshold } else { 0.0 })
        .fold(0.0, |a, x| a + x)
        / horizon as f64;
    let rhs = linalg::spectral_norm(p.w())?.ln() / 2.0;
    Ok(InputCondition {
        lhs,
        rhs,
        holds: lhs > rhs,
        c_series,
    })
}

/// Every literature condition for one reservoir and signal.
pub fn evaluate_conditions(
    p: &ReservoirParams,
    s: &Signal,
    horizon: usize,
    search: &CertificateSearch,
) -> Result<ConditionReport> {
    let spectral_radius = linalg::spectral_radius(p.w())?;
    let spectral_norm = linalg::spectral_norm(p.w())?;
    let cert = schur_certificate_search(p.w(), search)?;
    let input = input_dependent_sufficient(p, s, horizon)?;
    Ok(ConditionReport {
        spectral_radius,
        spectral_norm,
        necessary_holds: spectral_radius < 1.0,
        schur_status: cert.status,
        schur_certificate: cert.diagonal,
        input_condition_holds: input.holds,
        input_condition_lhs: input.lhs,
        input_condition_rhs: input.rhs,
        c_series: input.c_series,
    })
}
