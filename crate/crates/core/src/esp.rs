//! Empirical echo state property index.
//!
//! The reservoir is run from the zero state to get a reference orbit, then
//! from `P` random initial states under the same input. For each trial the
//! Euclidean distance to the reference is averaged over the steps after the
//! transient; the index is the mean of those averages over trials. An index
//! of zero means every trial orbit collapsed onto the reference.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::reservoir::{run_orbit, Orbit, ReservoirParams, Signal, State};
use crate::rng::{mix, Stream, ESP_STREAM};

/// Index values at or below this are read as "ESP empirically satisfied".
pub const DEFAULT_ESP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EspIndexConfig {
    /// Number of random initial states (P).
    pub p_trials: usize,
    /// Steps discarded before deviations are measured (T).
    pub transient: usize,
    /// Number of input steps used (L).
    pub horizon: usize,
    /// Seed for the initial-state draws.
    pub seed: u64,
    /// Keep every per-step deviation in the result.
    pub keep_per_step: bool,
}

impl Default for EspIndexConfig {
    fn default() -> Self {
        EspIndexConfig {
            p_trials: 50,
            transient: 500,
            horizon: 1000,
            seed: 0,
            keep_per_step: false,
        }
    }
}

impl EspIndexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_trials == 0 {
            return Err(invalid("p_trials must be positive"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon must be positive"));
        }
        if self.transient >= self.horizon {
            return Err(invalid(format!(
                "transient {} must be smaller than horizon {}",
                self.transient, self.horizon
            )));
        }
        Ok(())
    }

    /// Seed of trial `i`: `mix(seed, [ESP_STREAM, i])`. Growing `p_trials`
    /// appends trials without changing earlier ones.
    pub fn trial_seed(&self, i: usize) -> u64 {
        mix(self.seed, &[ESP_STREAM, i as u64])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EspIndexResult {
    pub index: f64,
    /// Mean deviation of each trial, in trial order.
    pub per_trial: Vec<f64>,
    /// Per-trial deviation series (`horizon - transient` entries each), when requested.
    pub per_step: Option<Vec<Vec<f64>>>,
}

impl EspIndexResult {
    pub fn is_esp_empirical(&self, tol: f64) -> bool {
        is_esp_empirical(self, tol)
    }
}

/// Draws a trial initial state uniform on the open cube (-1, 1)^n.
pub fn random_initial_state(n_r: usize, seed: u64) -> State {
    let mut s = Stream::new(seed);
    State::new((0..n_r).map(|_| s.symmetric_open()).collect())
}

/// Distances between matching states after `transient`, and their mean.
pub fn orbit_deviation(
    reference: &Orbit,
    trial: &Orbit,
    transient: usize,
) -> Result<(Vec<f64>, f64)> {
    if reference.len() != trial.len() || reference.n_r() != trial.n_r() {
        return Err(invalid(format!(
            "orbit shapes differ: {}x{} vs {}x{}",
            reference.len(),
            reference.n_r(),
            trial.len(),
            trial.n_r()
        )));
    }
    if transient + 1 >= reference.len() {
        return Err(invalid(format!(
            "transient {} leaves no steps in an orbit of {} states",
            transient,
            reference.len()
        )));
    }
    let deltas: Vec<f64> = (transient + 1..reference.len())
        .map(|t| {
            reference
                .state(t)
                .iter()
                .zip(trial.state(t))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let mean = sum_in_order(&deltas) / deltas.len() as f64;
    Ok((deltas, mean))
}

fn sum_in_order(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |acc, &x| acc + x)
}

pub fn esp_index(p: &ReservoirParams, s: &Signal, cfg: &EspIndexConfig) -> Result<EspIndexResult> {
    cfg.validate()?;
    p.check_signal(s)?;
    if s.len() < cfg.horizon {
        return Err(invalid(format!(
            "horizon {} exceeds signal length {}",
            cfg.horizon,
            s.len()
        )));
    }
    let input = s.prefix(cfg.horizon);
    let reference = run_orbit(p, &State::zeros(p.n_r()), &input)?;

    // Trials are independent; collect() keeps trial order, and the sums below
    // are left-to-right, so the result does not depend on scheduling.
    let trials: Vec<(Vec<f64>, f64)> = (0..cfg.p_trials)
        .into_par_iter()
        .map(|i| {
            let z0 = random_initial_state(p.n_r(), cfg.trial_seed(i));
            let orbit = run_orbit(p, &z0, &input)?;
            orbit_deviation(&reference, &orbit, cfg.transient)
        })
        .collect::<Result<_>>()?;

    let per_trial: Vec<f64> = trials.iter().map(|(_, m)| *m).collect();
    let index = sum_in_order(&per_trial) / per_trial.len() as f64;
    let per_step = cfg
        .keep_per_step
        .then(|| trials.into_iter().map(|(d, _)| d).collect());
    Ok(EspIndexResult {
        index,
        per_trial,
        per_step,
    })
}

pub fn is_esp_empirical(r: &EspIndexResult, tol: f64) -> bool {
    r.index <= tol
}
