//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use esplab::conditions::{
    diagonal_similarity, input_dependent_sufficient, necessary_condition, schur_certificate_search,
    SchurStatus,
};
use esplab::data::{load_laser, load_sunspot_silso, make_next_step_task, Dataset, NextStepTask};
use esplab::esp::{esp_index, EspIndexConfig};
use esplab::linalg::{spectral_norm, spectral_radius, Matrix};
use esplab::readout::{ridge_fit, RegressionProblem};
use esplab::reservoir::{init_reservoir, ReservoirParams, Signal};
use esplab::rng::Stream;
use esplab::sweep::{execute, ExecOptions, SweepConfig, SweepResults};
use nalgebra::SymmetricEigen;

type Outcome = (bool, String);
type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn laser() -> Signal {
    load_laser(&data_dir().join("laser.txt")).expect("data/laser.txt (run scripts/fetch_data.py)")
}

fn laser_task(s: &Signal) -> NextStepTask {
    make_next_step_task(s, 5000, 5092, 1000).unwrap()
}

fn noise(len: usize, seed: u64) -> Signal {
    let mut s = Stream::new(seed);
    Signal::univariate((0..len).map(|_| s.symmetric()).collect()).unwrap()
}

/// Random `n x n` reservoir matrix rescaled to the given spectral norm.
fn with_norm(n: usize, norm: f64, seed: u64) -> Matrix {
    let w = init_reservoir(n, 1, 1.0, 1.0, seed).unwrap().w().clone();
    let s = spectral_norm(&w).unwrap();
    w * (norm / s)
}

/// `||M||_2` via the eigenvalues of `M^T M`, a different route from the SVD
/// the library uses.
fn norm_by_gram(m: &Matrix) -> f64 {
    SymmetricEigen::new(m.transpose() * m)
        .eigenvalues
        .max()
        .max(0.0)
        .sqrt()
}

fn c1_contraction() -> Outcome {
    let cfg = EspIndexConfig::default();
    let input = noise(cfg.horizon, 7);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let w = with_norm(50, 0.9, 100 + k);
        let w_in = init_reservoir(50, 1, 1.0, 1.0, 200 + k)
            .unwrap()
            .w_in()
            .clone();
        let p = ReservoirParams::from_matrices(w, w_in).unwrap();
        let r = esp_index(
            &p,
            &input,
            &EspIndexConfig {
                seed: k,
                ..cfg.clone()
            },
        )
        .unwrap();
        worst = worst.max(r.index);
    }
    (
        worst < 1e-10,
        format!("max index over 50 reservoirs = {worst:.3e} (< 1e-10)"),
    )
}

fn c2_instability() -> Outcome {
    let p = ReservoirParams::from_matrices(Matrix::from_element(1, 1, 4.0), Matrix::zeros(1, 1))
        .unwrap();
    let cfg = EspIndexConfig {
        seed: 1,
        ..EspIndexConfig::default()
    };
    let r = esp_index(&p, &Signal::zeros(1, cfg.horizon), &cfg).unwrap();
    let x_star = common::scalar_fixed_point(4.0);
    let err = (r.index - x_star).abs();
    (
        err < 1e-3,
        format!(
            "index {:.10} vs |x*| {x_star:.10}, error {err:.2e} (< 1e-3)",
            r.index
        ),
    )
}

fn c3_necessary() -> Outcome {
    let mut stream = Stream::new(3);
    let (mut agree, mut eig_err) = (0, 0.0f64);
    for k in 0..100 {
        let n = 1 + k % 6;
        let raw = Matrix::from_fn(n, n, |_, _| stream.symmetric());
        let rho0 = common::spectral_radius(&common::from_nalgebra(&raw));
        let target = 0.5 + stream.symmetric().abs();
        let w = raw * (target / rho0);
        let rho_ref = common::spectral_radius(&common::from_nalgebra(&w));
        eig_err = eig_err.max((spectral_radius(&w).unwrap() - rho_ref).abs());
        if necessary_condition(&w).unwrap() == (rho_ref < 1.0) {
            agree += 1;
        }
    }
    (
        agree == 100 && eig_err <= 1e-8,
        format!("agreement {agree}/100, max |rho - rho_oracle| = {eig_err:.2e} (<= 1e-8)"),
    )
}

fn c4_certificates(sweeps: &[&SweepResults]) -> Outcome {
    let (mut checked, mut violations, mut worst) = (0, 0, 0.0f64);
    for res in sweeps {
        let cfg = &res.config;
        for rec in res
            .records
            .iter()
            .filter(|r| r.schur_status == SchurStatus::Certified)
        {
            checked += 1;
            let i = cfg.rho_values.iter().position(|&v| v == rec.rho).unwrap();
            let j = cfg
                .scale_values
                .iter()
                .position(|&v| v == rec.input_scale)
                .unwrap();
            let p = init_reservoir(
                cfg.n_r,
                1,
                rec.rho,
                rec.input_scale,
                cfg.realization_seed(i, j, rec.seed_index),
            )
            .unwrap();
            let cert = schur_certificate_search(p.w(), &cfg.search).unwrap();
            let ok = match &cert.diagonal {
                Some(d) if cert.status == SchurStatus::Certified => {
                    let n = norm_by_gram(&diagonal_similarity(p.w(), d));
                    worst = worst.max(n);
                    n < 1.0
                }
                _ => false,
            };
            if !ok || !rec.necessary_holds {
                violations += 1;
            }
        }
    }
    (
        checked > 0 && violations == 0,
        format!("{checked} certified records re-checked, {violations} violations, max ||DWD^-1|| = {worst:.6}"),
    )
}

fn c5_zero_input() -> Outcome {
    let mut stream = Stream::new(5);
    let zero = Signal::zeros(1, 1000);
    let (mut mismatches, mut below) = (0, 0);
    for k in 0..50 {
        let mut target = 0.5 + stream.symmetric().abs();
        if (target - 1.0).abs() < 1e-6 {
            target = 1.1;
        }
        let w = with_norm(50, target, 500 + k);
        let sigma = norm_by_gram(&w);
        let w_in = init_reservoir(50, 1, 1.0, 1.0, 600 + k)
            .unwrap()
            .w_in()
            .clone();
        let p = ReservoirParams::from_matrices(w, w_in).unwrap();
        let c = input_dependent_sufficient(&p, &zero, 1000).unwrap();
        below += usize::from(sigma < 1.0);
        if c.holds != (sigma < 1.0) {
            mismatches += 1;
        }
    }
    (
        mismatches == 0,
        format!("{mismatches} mismatches over 50 reservoirs ({below} with norm < 1)"),
    )
}

fn mean_index(res: &SweepResults, rho: f64, scale: f64) -> f64 {
    let c = res
        .cells
        .iter()
        .find(|c| c.rho == rho && c.input_scale == scale)
        .unwrap();
    c.mean_esp_index
}

fn c6_trend(res: &SweepResults) -> Outcome {
    let (lo, hi) = (mean_index(res, 1.5, 1.0), mean_index(res, 1.5, 30.0));
    (
        hi < lo,
        format!("rho 1.5: mean index {hi:.3e} at scale 30 vs {lo:.3e} at scale 1"),
    )
}

fn c7_beyond(res: &SweepResults) -> Outcome {
    let found: Vec<String> = res
        .cells
        .iter()
        .filter(|c| c.rho > 1.0 && c.n_failed == 0 && c.mean_esp_index <= 1e-8)
        .map(|c| format!("({}, {})", c.rho, c.input_scale))
        .collect();
    (
        !found.is_empty(),
        format!(
            "{} cells with rho > 1 and mean index <= 1e-8: {}",
            found.len(),
            found.join(" ")
        ),
    )
}

fn c8_performance(res: &SweepResults) -> Outcome {
    let (mut stable, mut unstable) = (Vec::new(), Vec::new());
    for (c, &v) in res.cells.iter().zip(&res.normalized_index) {
        if v <= 0.01 {
            stable.push(c.log10_test_mse);
        } else if v > 0.5 {
            unstable.push(c.log10_test_mse);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (a, b) = (mean(&stable), mean(&unstable));
    (
        !stable.is_empty() && !unstable.is_empty() && a < b,
        format!(
            "mean log10 test MSE {a:.3} over {} stable cells vs {b:.3} over {} unstable cells",
            stable.len(),
            unstable.len()
        ),
    )
}

fn c9_ridge() -> Outcome {
    let prob = RegressionProblem::new(
        Matrix::from_column_slice(2, 1, &[1.0, 2.0]),
        Matrix::from_column_slice(2, 1, &[2.0, 4.0]),
    )
    .unwrap();
    let w = ridge_fit(&prob, 1.0).unwrap().w_out[(0, 0)];
    let scalar_ok = (w - 10.0 / 6.0).abs() < 1e-12;

    let mut stream = Stream::new(9);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let (n, m, ny) = (20 + k % 30, 1 + k % 12, 1 + k % 3);
        let x = Matrix::from_fn(n, m, |_, _| stream.symmetric());
        let y = Matrix::from_fn(n, ny, |_, _| stream.symmetric());
        let lambda = 10f64.powi(-(k as i32 % 9));
        let wts = ridge_fit(
            &RegressionProblem::new(x.clone(), y.clone()).unwrap(),
            lambda,
        )
        .unwrap();
        let gram = x.transpose() * &x + Matrix::identity(m, m) * lambda;
        let rhs = x.transpose() * &y;
        let wt = wts.w_out.transpose();
        let residual = (&gram * &wt - &rhs).norm();
        let scale = gram.norm() * wt.norm() + rhs.norm();
        worst = worst.max(residual / scale);
    }
    let bound = 1e-12;
    (
        scalar_ok && worst <= bound,
        format!("scalar w = {w:.15} (10/6), max relative normal-equation residual {worst:.2e} (<= {bound:e})"),
    )
}

fn c10_parallel(a: &Path, b: &Path) -> Outcome {
    let (x, y) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    (
        x == y,
        format!(
            "1-worker and 8-worker files: {} vs {} bytes, identical = {}",
            x.len(),
            y.len(),
            x == y
        ),
    )
}

fn c11_data(dir: &Path, laser: &Signal) -> Outcome {
    let path = dir.join("silso.csv");
    let mut text = String::new();
    for year in 1740..=2024 {
        for month in 1..=12 {
            let mean = 80.0 + 60.0 * ((year * 12 + month) as f64 / 20.0).sin();
            writeln!(
                text,
                "{year};{month:02};{:.3};{mean:6.1};  9.9;   42;1",
                year as f64 + (month as f64 - 0.5) / 12.0
            )
            .unwrap();
        }
    }
    std::fs::write(&path, text).unwrap();
    let (from, to) = Dataset::sunspot_range();
    let fixture_len = load_sunspot_silso(&path, from, to).map(|s| s.len());
    let mut detail = format!("SILSO fixture 1749-01..2018-09: {fixture_len:?} values");
    let mut ok = fixture_len.as_ref().ok() == Some(&3237);
    for name in ["SN_m_tot_V2.0.csv", "SN_m_tot_V2.0.txt"] {
        let real = data_dir().join(name);
        if real.exists() {
            let n = Dataset::Sunspot.load(&real).map(|s| s.len());
            ok &= n.as_ref().ok() == Some(&3237);
            write!(detail, "; {name}: {n:?} values").unwrap();
        }
    }
    let task = make_next_step_task(laser, 5000, 5092, 1000);
    ok &= task.is_ok();
    write!(
        detail,
        "; Laser {} values, 5000/5092 split ok = {}",
        laser.len(),
        task.is_ok()
    )
    .unwrap();
    (ok, detail)
}

fn reduced_config(rho: &[f64], scale: &[f64], n_seeds: usize, p_trials: usize) -> SweepConfig {
    let mut cfg = SweepConfig::paper(Dataset::Laser);
    cfg.rho_values = rho.to_vec();
    cfg.scale_values = scale.to_vec();
    cfg.n_seeds = n_seeds;
    cfg.esp.p_trials = p_trials;
    cfg
}

fn main() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let laser = laser();
    let task = laser_task(&laser);
    let run = |cfg: &SweepConfig, threads: usize, out: Option<PathBuf>| {
        execute(cfg, &laser, &task, &ExecOptions { threads, out }).unwrap()
    };

    let reduced = reduced_config(
        &[0.5, 1.0, 1.5, 2.0, 3.0],
        &[1.0, 5.0, 10.0, 20.0, 30.0],
        3,
        10,
    );
    let (file1, file8) = (dir.path().join("one.csv"), dir.path().join("eight.csv"));
    let sweep_reduced = run(&reduced, 1, Some(file1.clone()));
    run(&reduced, 8, Some(file8.clone()));
    let sweep_beyond = run(
        &reduced_config(&[1.5, 2.0, 3.0], &[1.0, 5.0, 10.0, 20.0, 30.0], 5, 50),
        0,
        None,
    );
    let sweep_low = run(
        &reduced_config(&[0.1, 0.3, 0.5, 0.7], &[1.0, 10.0], 2, 10),
        0,
        None,
    );

    let checks: Vec<Check> = vec![
        ("contraction soundness", Box::new(c1_contraction)),
        ("instability detection", Box::new(c2_instability)),
        ("necessary condition", Box::new(c3_necessary)),
        (
            "certificate soundness",
            Box::new(|| c4_certificates(&[&sweep_reduced, &sweep_beyond, &sweep_low])),
        ),
        ("zero-input reduction", Box::new(c5_zero_input)),
        (
            "input stabilization trend",
            Box::new(|| c6_trend(&sweep_beyond)),
        ),
        ("ESP beyond rho < 1", Box::new(|| c7_beyond(&sweep_beyond))),
        (
            "stability vs test error",
            Box::new(|| c8_performance(&sweep_reduced)),
        ),
        ("ridge correctness", Box::new(c9_ridge)),
        (
            "parallel determinism",
            Box::new(|| c10_parallel(&file1, &file8)),
        ),
        ("data plumbing", Box::new(|| c11_data(dir.path(), &laser))),
    ];

    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (k, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = check();
        failed += usize::from(!pass);
        let verdict = if pass { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "criterion {:>2} {verdict} {name}: {detail} [{:.1}s]",
            k + 1,
            t.elapsed().as_secs_f64()
        )
        .unwrap();
    }
    writeln!(
        out,
        "acceptance: {} passed, {failed} failed in {:.1}s",
        checks.len() - failed,
        started.elapsed().as_secs_f64()
    )
    .unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
