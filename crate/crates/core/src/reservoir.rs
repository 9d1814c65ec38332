//! Randomly initialized tanh reservoirs and their driven orbits.
//!
//! The state transition is `x(t) = tanh(W x(t-1) + W_in u(t))` with no bias
//! term. `W` and `W_in` are frozen at construction.

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng::Stream;

/// A finite real-valued time series with `dim` channels per step.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    dim: usize,
    values: Vec<f64>,
}

impl Signal {
    /// Builds a signal from row-major step data (`values.len()` must be a
    /// multiple of `dim`).
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("signal dimension must be positive"));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "{} values do not divide into steps of dimension {dim}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at step {}", i / dim)));
        }
        Ok(Signal { dim, values })
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::new(1, values)
    }

    /// All-zero signal.
    pub fn zeros(dim: usize, len: usize) -> Self {
        Signal {
            dim,
            values: vec![0.0; dim * len],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Input vector at zero-based step `t` (the paper-style `u(t+1)`).
    pub fn step(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn steps(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Steps `[start, end)` as a new signal.
    pub fn slice(&self, start: usize, end: usize) -> Signal {
        Signal {
            dim: self.dim,
            values: self.values[start * self.dim..end * self.dim].to_vec(),
        }
    }

    pub fn prefix(&self, len: usize) -> Signal {
        self.slice(0, len.min(self.len()))
    }
}

/// A reservoir state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct State(Vec<f64>);

impl State {
    pub fn new(x: Vec<f64>) -> Self {
        State(x)
    }

    pub fn zeros(n_r: usize) -> Self {
        State(vec![0.0; n_r])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// State trajectory; `state(0)` is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    n_r: usize,
    data: Vec<f64>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.data.len() / self.n_r
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.data[t * self.n_r..(t + 1) * self.n_r]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_r)
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }
}

/// Frozen reservoir weights plus the settings they were drawn with.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirParams {
    w: Matrix,
    w_in: Matrix,
    target_rho: f64,
    input_scale: f64,
    seed: u64,
}

impl ReservoirParams {
    /// Wraps hand-built matrices. `target_rho` is set to the measured
    /// spectral radius and `input_scale` to the largest `|W_in|` entry.
    pub fn from_matrices(w: Matrix, w_in: Matrix) -> Result<Self> {
        if w.nrows() == 0 || w_in.ncols() == 0 {
            return Err(invalid("reservoir and input dimensions must be positive"));
        }
        if w_in.nrows() != w.nrows() {
            return Err(invalid(format!(
                "W_in has {} rows but W is {}x{}",
                w_in.nrows(),
                w.nrows(),
                w.ncols()
            )));
        }
        if w_in.iter().any(|v| !v.is_finite()) {
            return Err(invalid("W_in has non-finite entries"));
        }
        let target_rho = linalg::spectral_radius(&w)?;
        let input_scale = w_in.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(ReservoirParams {
            w,
            w_in,
            target_rho,
            input_scale,
            seed: 0,
        })
    }

    pub fn n_r(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_u(&self) -> usize {
        self.w_in.ncols()
    }

    pub fn w(&self) -> &Matrix {
        &self.w
    }

    pub fn w_in(&self) -> &Matrix {
        &self.w_in
    }

    pub fn target_rho(&self) -> f64 {
        self.target_rho
    }

    pub fn input_scale(&self) -> f64 {
        self.input_scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One transition written into `out`; `x`, `u` and `out` are assumed to
    /// have matching dimensions.
    pub(crate) fn advance(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        linalg::mat_vec_into(&self.w, x, out);
        let n = self.n_r();
        for (col, &uj) in self.w_in.as_slice().chunks_exact(n).zip(u) {
            for (o, &a) in out.iter_mut().zip(col) {
                *o += a * uj;
            }
        }
        out.iter_mut().for_each(|o| *o = o.tanh());
    }

    pub(crate) fn check_signal(&self, s: &Signal) -> Result<()> {
        if s.dim() != self.n_u() {
            return Err(invalid(format!(
                "signal dimension {} does not match reservoir input dimension {}",
                s.dim(),
                self.n_u()
            )));
        }
        Ok(())
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_r() {
            return Err(invalid(format!(
                "state dimension {} does not match reservoir size {}",
                x.len(),
                self.n_r()
            )));
        }
        Ok(())
    }
}

/// Draws `W` and `W_in` entry-wise uniform on [-1, 1] (row-major, `W` first)
/// from the ChaCha stream for `seed`, rescales `W` to spectral radius
/// `target_rho` and multiplies `W_in` by `input_scale`.
pub fn init_reservoir(
    n_r: usize,
    n_u: usize,
    target_rho: f64,
    input_scale: f64,
    seed: u64,
) -> Result<ReservoirParams> {
    if n_r == 0 || n_u == 0 {
        return Err(invalid("n_r and n_u must be positive"));
    }
    if !(target_rho.is_finite() && target_rho >= 0.0) {
        return Err(invalid(format!(
            "target_rho must be finite and >= 0, got {target_rho}"
        )));
    }
    if !(input_scale.is_finite() && input_scale >= 0.0) {
        return Err(invalid(format!(
            "input_scale must be finite and >= 0, got {input_scale}"
        )));
    }
    let mut stream = Stream::new(seed);
    let raw: Vec<f64> = (0..n_r * n_r).map(|_| stream.symmetric()).collect();
    let w = Matrix::from_row_slice(n_r, n_r, &raw);
    let raw_in: Vec<f64> = (0..n_r * n_u).map(|_| stream.symmetric()).collect();
    let w_in = Matrix::from_row_slice(n_r, n_u, &raw_in) * input_scale;

    let w = rescale(w, target_rho, seed)?;
    Ok(ReservoirParams {
        w,
        w_in,
        target_rho,
        input_scale,
        seed,
    })
}

fn rescale(mut w: Matrix, target_rho: f64, seed: u64) -> Result<Matrix> {
    if target_rho == 0.0 {
        w.fill(0.0);
        return Ok(w);
    }
    let rho_raw = linalg::spectral_radius(&w)?;
    if rho_raw == 0.0 {
        return Err(Error::Construction(format!(
            "seed {seed} drew a nilpotent W (spectral radius 0); cannot rescale to {target_rho}"
        )));
    }
    w *= target_rho / rho_raw;
    Ok(w)
}

/// One application of the state transition.
pub fn step(p: &ReservoirParams, x: &State, u: &[f64]) -> Result<State> {
    p.check_state(x.as_slice())?;
    if u.len() != p.n_u() {
        return Err(invalid(format!(
            "input dimension {} does not match reservoir input dimension {}",
            u.len(),
            p.n_u()
        )));
    }
    let mut out = vec![0.0; p.n_r()];
    p.advance(x.as_slice(), u, &mut out);
    Ok(State(out))
}

/// Iterates the transition from `x0` over every step of `s`. The result has
/// `s.len() + 1` states.
pub fn run_orbit(p: &ReservoirParams, x0: &State, s: &Signal) -> Result<Orbit> {
    p.check_state(x0.as_slice())?;
    p.check_signal(s)?;
    let n = p.n_r();
    let mut data = vec![0.0; n * (s.len() + 1)];
    data[..n].copy_from_slice(x0.as_slice());
    for (t, u) in s.steps().enumerate() {
        let (done, rest) = data.split_at_mut((t + 1) * n);
        p.advance(&done[t * n..], u, &mut rest[..n]);
    }
    Ok(Orbit { n_r: n, data })
}
