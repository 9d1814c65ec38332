use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use esplab::conditions::{evaluate_conditions, CertificateSearch};
use esplab::data::{make_next_step_task, Dataset};
use esplab::esp::{esp_index, EspIndexConfig, DEFAULT_ESP_TOL};
use esplab::plot::{render_heatmap, Quantity};
use esplab::readout::{default_lambda_grid, evaluate_next_step, ReadoutConfig};
use esplab::reservoir::{init_reservoir, ReservoirParams, Signal};
use esplab::sweep::{execute, read_results, write_cell_summary, ExecOptions, SweepConfig};
use esplab::Error;

/// Echo state property index, stability conditions and sweeps for echo state networks.
#[derive(Parser)]
#[command(name = "esplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical ESP index of one reservoir driven by a dataset.
    EspIndex {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        reservoir: Reservoir,
        #[command(flatten)]
        esp: EspArgs,
        /// Index at or below which the ESP counts as satisfied.
        #[arg(long, default_value_t = DEFAULT_ESP_TOL)]
        tol: f64,
    },
    /// Spectral radius, Schur certificate and input-driven condition.
    Conditions {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        reservoir: Reservoir,
        /// Horizon over which the input-driven condition is averaged.
        #[arg(long = "L", default_value_t = 1000)]
        horizon: usize,
        /// Diagonal-scaling search iterations per restart.
        #[arg(long, default_value_t = 500)]
        schur_max_iters: usize,
        /// Certification margin: requires ||D W D^-1||_2 <= 1 - eps.
        #[arg(long, default_value_t = 1e-6)]
        schur_eps: f64,
    },
    /// Train a ridge readout for one-step-ahead prediction and report MSE.
    TrainEval {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        reservoir: Reservoir,
        /// Training length (default: 5000 laser, 3000 sunspot).
        #[arg(long)]
        train_len: Option<usize>,
        /// Test length (default: 5092 laser, 236 sunspot).
        #[arg(long)]
        test_len: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        washout: usize,
        /// Fixed regularization; by default chosen on a validation split
        /// from 1e-8, 1e-7, ..., 1e2.
        #[arg(long)]
        lambda: Option<f64>,
        /// Trailing fraction of the training states used for validation.
        #[arg(long, default_value_t = 0.2)]
        val_fraction: f64,
    },
    /// Run (or resume) a grid sweep and write a results file.
    Sweep {
        #[command(flatten)]
        input: Input,
        /// Flat key = value file; command-line overrides take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Results file; an existing compatible file is resumed.
        #[arg(long)]
        out: PathBuf,
        /// Per-cell summary file (default: <out>.cells.csv).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Spectral radii, `a,b,c` or `start:stop:step` (default 0.1:4:0.1).
        #[arg(long)]
        rho: Option<String>,
        /// Input scales, `a,b,c` or `start:stop:step` (default 1:30:1).
        #[arg(long)]
        scale: Option<String>,
        /// Realizations per cell (default 20).
        #[arg(long)]
        n_seeds: Option<usize>,
        /// Reservoir size (default 100).
        #[arg(long)]
        n_r: Option<usize>,
        /// ESP trials per realization (default 50).
        #[arg(long = "P")]
        trials: Option<usize>,
        /// Base seed for per-cell seed derivation (default 0).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a heatmap of a results file as SVG.
    Plot {
        #[arg(long)]
        results: PathBuf,
        /// esp_index_normalized or log10_test_mse.
        #[arg(long, default_value = "esp_index_normalized")]
        quantity: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Input {
    /// Series file: one value per line (laser) or a SILSO monthly file (sunspot).
    #[arg(long)]
    data: PathBuf,
    /// laser or sunspot; selects the file format and default splits.
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Args)]
struct Reservoir {
    /// Target spectral radius of W.
    #[arg(long)]
    rho: f64,
    /// Input scaling applied to W_in.
    #[arg(long)]
    scale: f64,
    #[arg(long, default_value_t = 100)]
    n_r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EspArgs {
    /// Orbit length.
    #[arg(long = "L", default_value_t = 1000)]
    horizon: usize,
    /// Transient steps discarded before measuring deviations.
    #[arg(long = "T", default_value_t = 500)]
    transient: usize,
    /// Number of random initial states.
    #[arg(long = "P", default_value_t = 50)]
    trials: usize,
}

/// Exit code 2 for bad arguments or inputs, 1 for failures while computing.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl ToString) -> Self {
        Failure {
            code: 2,
            msg: msg.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_)
            | Error::Parse { .. }
            | Error::Data { .. }
            | Error::Config(_) => 2,
            Error::Schema { .. } => 2,
            Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => 2,
            _ => 1,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

type Outcome = Result<String, Failure>;

/// Shortest round-trip form, in scientific notation outside [1e-3, 1e6).
fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-3..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn dataset(name: Option<&str>) -> Result<Dataset, Failure> {
    name.map_or(Ok(Dataset::Laser), |s| s.parse().map_err(Failure::usage))
}

fn load(input: &Input) -> Result<(Dataset, Signal), Failure> {
    let ds = dataset(input.dataset.as_deref())?;
    let signal = ds.load(&input.data).map_err(|e| match e {
        Error::Io(io) => Failure::usage(format!("{}: {io}", input.data.display())),
        other => other.into(),
    })?;
    Ok((ds, signal))
}

fn build(r: &Reservoir, n_u: usize) -> Result<ReservoirParams, Failure> {
    Ok(init_reservoir(r.n_r, n_u, r.rho, r.scale, r.seed)?)
}

fn cmd_esp_index(input: &Input, r: &Reservoir, esp: &EspArgs, tol: f64) -> Outcome {
    let (_, signal) = load(input)?;
    let p = build(r, signal.dim())?;
    let cfg = EspIndexConfig {
        p_trials: esp.trials,
        transient: esp.transient,
        horizon: esp.horizon,
        seed: r.seed,
        keep_per_step: false,
    };
    let res = esp_index(&p, &signal, &cfg)?;
    let n = res.per_trial.len() as f64;
    let mean = res.index;
    let var = res
        .per_trial
        .iter()
        .map(|d| (d - mean).powi(2))
        .sum::<f64>()
        / n;
    let min = res.per_trial.iter().copied().fold(f64::INFINITY, f64::min);
    let max = res
        .per_trial
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut s = String::new();
    writeln!(s, "esp_index = {}", num(res.index)).unwrap();
    writeln!(s, "esp_satisfied = {}", u8::from(res.is_esp_empirical(tol))).unwrap();
    writeln!(s, "trials = {}", res.per_trial.len()).unwrap();
    writeln!(s, "trial_min = {}", num(min)).unwrap();
    writeln!(s, "trial_max = {}", num(max)).unwrap();
    writeln!(s, "trial_std = {}", num(var.sqrt())).unwrap();
    Ok(s)
}

fn cmd_conditions(
    input: &Input,
    r: &Reservoir,
    horizon: usize,
    search: CertificateSearch,
) -> Outcome {
    let (_, signal) = load(input)?;
    let p = build(r, signal.dim())?;
    let c = evaluate_conditions(&p, &signal, horizon, &search)?;
    let mut s = String::new();
    writeln!(s, "spectral_radius = {}", num(c.spectral_radius)).unwrap();
    writeln!(s, "spectral_norm = {}", num(c.spectral_norm)).unwrap();
    writeln!(s, "necessary = {}", u8::from(c.necessary_holds)).unwrap();
    writeln!(s, "schur = {}", c.schur_status).unwrap();
    writeln!(s, "input_condition = {}", u8::from(c.input_condition_holds)).unwrap();
    writeln!(s, "input_condition_lhs = {}", num(c.input_condition_lhs)).unwrap();
    writeln!(s, "input_condition_rhs = {}", num(c.input_condition_rhs)).unwrap();
    writeln!(s, "sufficient = {}", u8::from(c.sufficient_holds())).unwrap();
    Ok(s)
}

#[allow(clippy::too_many_arguments)]
fn cmd_train_eval(
    input: &Input,
    r: &Reservoir,
    train_len: Option<usize>,
    test_len: Option<usize>,
    washout: usize,
    lambda: Option<f64>,
    val_fraction: f64,
) -> Outcome {
    let (ds, signal) = load(input)?;
    let task = make_next_step_task(
        &signal,
        train_len.unwrap_or(ds.default_train_len()),
        test_len.unwrap_or(ds.default_test_len()),
        washout,
    )?;
    let p = build(r, signal.dim())?;
    let cfg = ReadoutConfig {
        lambda_grid: lambda.map_or_else(default_lambda_grid, |l| vec![l]),
        val_fraction,
    };
    let eval = evaluate_next_step(&p, &task, &cfg)?;
    let mut s = String::new();
    writeln!(s, "lambda = {}", num(eval.weights.lambda)).unwrap();
    writeln!(s, "train_mse = {}", num(eval.train_mse)).unwrap();
    writeln!(s, "test_mse = {}", num(eval.test_mse)).unwrap();
    Ok(s)
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".cells.csv");
    out.with_file_name(name)
}

fn sweep_config(
    config: Option<&Path>,
    dataset: Option<&str>,
    overrides: &[(&str, Option<String>)],
) -> Result<SweepConfig, Failure> {
    let mut text = match config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    text.push('\n');
    if let Some(ds) = dataset {
        writeln!(text, "dataset = {ds}").unwrap();
    }
    for (key, value) in overrides {
        if let Some(v) = value {
            writeln!(text, "{key} = {v}").unwrap();
        }
    }
    Ok(SweepConfig::from_kv(&text)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::EspIndex {
            input,
            reservoir,
            esp,
            tol,
        } => cmd_esp_index(input, reservoir, esp, *tol),
        Command::Conditions {
            input,
            reservoir,
            horizon,
            schur_max_iters,
            schur_eps,
        } => cmd_conditions(
            input,
            reservoir,
            *horizon,
            CertificateSearch {
                max_iters: *schur_max_iters,
                eps: *schur_eps,
            },
        ),
        Command::TrainEval {
            input,
            reservoir,
            train_len,
            test_len,
            washout,
            lambda,
            val_fraction,
        } => cmd_train_eval(
            input,
            reservoir,
            *train_len,
            *test_len,
            *washout,
            *lambda,
            *val_fraction,
        ),
        Command::Sweep {
            input,
            config,
            out,
            summary,
            threads,
            rho,
            scale,
            n_seeds,
            n_r,
            trials,
            seed,
        } => (|| {
            let str_of = |v: Option<usize>| v.map(|x| x.to_string());
            let cfg = sweep_config(
                config.as_deref(),
                input.dataset.as_deref(),
                &[
                    ("rho", rho.clone()),
                    ("scale", scale.clone()),
                    ("n_seeds", str_of(*n_seeds)),
                    ("n_r", str_of(*n_r)),
                    ("esp_trials", str_of(*trials)),
                    ("base_seed", seed.map(|s| s.to_string())),
                ],
            )?;
            let signal = cfg.dataset.load(&input.data).map_err(|e| match e {
                Error::Io(io) => Failure::usage(format!("{}: {io}", input.data.display())),
                other => other.into(),
            })?;
            let task = make_next_step_task(&signal, cfg.train_len, cfg.test_len, cfg.washout)?;
            let opts = ExecOptions {
                threads: *threads,
                out: Some(out.clone()),
            };
            let results = execute(&cfg, &signal, &task, &opts)?;
            let summary = summary.clone().unwrap_or_else(|| summary_path(out));
            write_cell_summary(&results, &summary)?;
            let failed: usize = results.cells.iter().map(|c| c.n_failed).sum();
            Ok(format!(
                "{} records ({failed} failed) written to {}; cell summary in {}\n",
                results.records.len(),
                out.display(),
                summary.display()
            ))
        })(),
        Command::Plot {
            results,
            quantity,
            out,
        } => (|| {
            let q: Quantity = quantity.parse().map_err(Failure::usage)?;
            let res = read_results(results)?;
            let svg = render_heatmap(&res, q)?;
            fs::write(out, svg).map_err(|e| Failure {
                code: 1,
                msg: format!("{}: {e}", out.display()),
            })?;
            Ok(format!("wrote {}\n", out.display()))
        })(),
    };
    match outcome {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("esplab: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
