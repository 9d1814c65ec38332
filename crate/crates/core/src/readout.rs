//! Linear readout trained by ridge regression.

use nalgebra::{Cholesky, SVD};

use crate::data::NextStepTask;
use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::reservoir::{run_orbit, Orbit, ReservoirParams, Signal, State};

/// Harvested states (one row per time step) and aligned targets.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    states: Matrix,
    targets: Matrix,
}

impl RegressionProblem {
    pub fn new(states: Matrix, targets: Matrix) -> Result<Self> {
        if states.nrows() != targets.nrows() {
            return Err(invalid(format!(
                "{} state rows but {} target rows",
                states.nrows(),
                targets.nrows()
            )));
        }
        if states.nrows() == 0 {
            return Err(invalid("regression problem has no rows"));
        }
        if states.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("regression problem has non-finite entries"));
        }
        Ok(RegressionProblem { states, targets })
    }

    pub fn states(&self) -> &Matrix {
        &self.states
    }

    pub fn targets(&self) -> &Matrix {
        &self.targets
    }

    pub fn rows(&self) -> usize {
        self.states.nrows()
    }

    fn split(&self, head: usize) -> (RegressionProblem, RegressionProblem) {
        let r = self.rows();
        let part = |m: &Matrix, a: usize, b: usize| m.rows(a, b - a).into_owned();
        (
            RegressionProblem {
                states: part(&self.states, 0, head),
                targets: part(&self.targets, 0, head),
            },
            RegressionProblem {
                states: part(&self.states, head, r),
                targets: part(&self.targets, head, r),
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutWeights {
    /// `N_Y x N_R`.
    pub w_out: Matrix,
    pub lambda: f64,
}

/// Normal equations `X^T X` and `X^T Y`, formed once and reused across λ.
struct Gram {
    xtx: Matrix,
    xty: Matrix,
}

impl Gram {
    fn new(p: &RegressionProblem) -> Self {
        Gram {
            xtx: p.states.tr_mul(&p.states),
            xty: p.states.tr_mul(&p.targets),
        }
    }

    /// Cholesky solve of `(X^T X + λI) W = X^T Y`; `None` if the factorization
    /// breaks down numerically.
    fn solve(&self, lambda: f64) -> Option<Matrix> {
        let n = self.xtx.nrows();
        let g = &self.xtx + Matrix::identity(n, n) * lambda;
        Cholesky::new(g).map(|c| c.solve(&self.xty))
    }
}

/// Minimum-norm least-squares solution of `(X^T X + λI) W = X^T Y` through
/// an SVD of `X`: `W = V diag(s / (s^2 + λ)) U^T Y`, with singular values
/// below `max(rows, cols) * s_max * eps` dropped.
fn solve_svd(p: &RegressionProblem, lambda: f64) -> Result<Matrix> {
    let x = &p.states;
    let svd = SVD::try_new(x.clone(), true, true, f64::EPSILON, 100_000)
        .ok_or_else(|| invalid("SVD of the state matrix did not converge"))?;
    let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let cutoff = x.nrows().max(x.ncols()) as f64 * smax * f64::EPSILON;
    let mut uty = u.tr_mul(&p.targets);
    for (i, &si) in s.iter().enumerate() {
        let f = if si > cutoff {
            si / (si * si + lambda)
        } else {
            0.0
        };
        uty.row_mut(i).scale_mut(f);
    }
    Ok(vt.tr_mul(&uty))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "ridge coefficient must be finite and >= 0, got {lambda}"
        )))
    }
}

/// Ridge regression. `λ > 0` uses a Cholesky factorization of the
/// regularized Gram matrix, falling back to the SVD route if it is not
/// numerically positive definite; `λ = 0` always uses the SVD route, which
/// returns the minimum-norm solution for rank-deficient states.
pub fn ridge_fit(prob: &RegressionProblem, lambda: f64) -> Result<ReadoutWeights> {
    check_lambda(lambda)?;
    let w = if lambda > 0.0 {
        match Gram::new(prob).solve(lambda) {
            Some(w) => w,
            None => solve_svd(prob, lambda)?,
        }
    } else {
        solve_svd(prob, 0.0)?
    };
    Ok(ReadoutWeights {
        w_out: w.transpose(),
        lambda,
    })
}

fn fit_with_gram(prob: &RegressionProblem, gram: &Gram, lambda: f64) -> Result<Matrix> {
    if lambda > 0.0 {
        if let Some(w) = gram.solve(lambda) {
            return Ok(w);
        }
    }
    solve_svd(prob, lambda)
}

/// Chooses λ from `grid` by fitting on the first `1 - val_fraction` of the
/// rows and scoring MSE on the remaining tail (chronological, no shuffling).
/// Ties go to the larger λ.
pub fn select_lambda(prob: &RegressionProblem, grid: &[f64], val_fraction: f64) -> Result<f64> {
    if grid.is_empty() {
        return Err(invalid("lambda grid is empty"));
    }
    for &l in grid {
        check_lambda(l)?;
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(invalid(format!(
            "val_fraction must lie in (0, 1), got {val_fraction}"
        )));
    }
    let rows = prob.rows();
    let n_val = (rows as f64 * val_fraction).round() as usize;
    if n_val == 0 || n_val >= rows {
        return Err(invalid(format!(
            "cannot split {rows} rows with validation fraction {val_fraction}"
        )));
    }
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let (head, tail) = prob.split(rows - n_val);
    let gram = Gram::new(&head);
    let mut best: Option<(f64, f64)> = None;
    for &lambda in grid {
        let w = fit_with_gram(&head, &gram, lambda)?;
        let pred = &tail.states * &w;
        let err = mse(&pred, &tail.targets)?;
        let better = match best {
            None => true,
            Some((bl, be)) => err < be || (err == be && lambda > bl),
        };
        if better {
            best = Some((lambda, err));
        }
    }
    Ok(best.map(|(l, _)| l).unwrap())
}

/// Row-wise `y = W_out x`: returns `rows x N_Y`.
pub fn predict(wts: &ReadoutWeights, states: &Matrix) -> Result<Matrix> {
    if states.ncols() != wts.w_out.ncols() {
        return Err(invalid(format!(
            "states have {} columns, readout expects {}",
            states.ncols(),
            wts.w_out.ncols()
        )));
    }
    Ok(states * wts.w_out.transpose())
}

/// Mean of squared entry-wise differences.
pub fn mse(pred: &Matrix, target: &Matrix) -> Result<f64> {
    if pred.shape() != target.shape() {
        return Err(invalid(format!(
            "shape mismatch: {:?} vs {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    if pred.is_empty() {
        return Err(invalid("mse of empty matrices"));
    }
    let sum = pred
        .iter()
        .zip(target.iter())
        .fold(0.0, |acc, (p, t)| acc + (p - t) * (p - t));
    Ok(sum / pred.len() as f64)
}

/// `log10(mse)`; a zero error maps to negative infinity.
pub fn log10_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::NEG_INFINITY
    } else {
        mse.log10()
    }
}

/// How the readout is regularized when training on a task.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutConfig {
    pub lambda_grid: Vec<f64>,
    pub val_fraction: f64,
}

/// Log grid 1e-8, 1e-7, ..., 1e2.
pub fn default_lambda_grid() -> Vec<f64> {
    (-8..=2).map(|e| 10f64.powi(e)).collect()
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        ReadoutConfig {
            lambda_grid: default_lambda_grid(),
            val_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NextStepEvaluation {
    pub weights: ReadoutWeights,
    pub train_mse: f64,
    pub test_mse: f64,
}

fn rows_of(orbit: &Orbit, from: usize) -> Matrix {
    let n = orbit.n_r();
    let rows = orbit.len() - from;
    Matrix::from_fn(rows, n, |i, j| orbit.state(from + i)[j])
}

fn as_matrix(s: &Signal, from: usize) -> Matrix {
    Matrix::from_fn(s.len() - from, s.dim(), |i, j| s.step(from + i)[j])
}

/// Drives the reservoir from the zero state through the training inputs,
/// fits the readout on the post-washout states, then continues the same
/// orbit through the test inputs and scores both splits.
pub fn evaluate_next_step(
    p: &ReservoirParams,
    task: &NextStepTask,
    cfg: &ReadoutConfig,
) -> Result<NextStepEvaluation> {
    let train = run_orbit(p, &State::zeros(p.n_r()), &task.train_inputs)?;
    // Orbit index t holds the state after input t, which predicts target t - 1.
    let x_train = rows_of(&train, task.washout + 1);
    let y_train = as_matrix(&task.train_targets, task.washout);
    let prob = RegressionProblem::new(x_train, y_train)?;
    let lambda = select_lambda(&prob, &cfg.lambda_grid, cfg.val_fraction)?;
    let weights = ridge_fit(&prob, lambda)?;
    let train_mse = mse(&predict(&weights, prob.states())?, prob.targets())?;

    let test = run_orbit(p, &State::new(train.last().to_vec()), &task.test_inputs)?;
    let x_test = rows_of(&test, 1);
    let y_test = as_matrix(&task.test_targets, 0);
    let test_mse = mse(&predict(&weights, &x_test)?, &y_test)?;
    Ok(NextStepEvaluation {
        weights,
        train_mse,
        test_mse,
    })
}
