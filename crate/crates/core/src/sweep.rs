//! Spectral radius x input scaling x realization sweeps.
//!
//! Every (cell, realization) is an independent work item whose reservoir
//! seed is `mix(base_seed, [rho_index, scale_index, realization])`; the
//! ESP-index trial states are drawn from that seed's own substreams. Records
//! are sorted by `(rho, input_scale, seed_index)` before they are returned or
//! written, so output is identical for any thread count.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::conditions::{evaluate_conditions, CertificateSearch, SchurStatus};
use crate::data::{Dataset, NextStepTask};
use crate::error::{invalid, Error, Result};
use crate::esp::{esp_index, EspIndexConfig, DEFAULT_ESP_TOL};
use crate::readout::{evaluate_next_step, ReadoutConfig};
use crate::reservoir::{init_reservoir, Signal};
use crate::rng::mix;

pub const SCHEMA_VERSION: u32 = 1;
const MAGIC: &str = "# esplab-results v";

/// Result columns, in file order.
pub const COLUMNS: [&str; 11] = [
    "rho",
    "input_scale",
    "seed_index",
    "esp_index",
    "necessary_holds",
    "schur_status",
    "input_condition_holds",
    "lambda_used",
    "train_mse",
    "test_mse",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dataset: Dataset,
    pub rho_values: Vec<f64>,
    pub scale_values: Vec<f64>,
    pub n_seeds: usize,
    pub n_r: usize,
    /// `seed` is ignored; each realization derives its own.
    pub esp: EspIndexConfig,
    pub base_seed: u64,
    pub train_len: usize,
    pub test_len: usize,
    pub washout: usize,
    pub readout: ReadoutConfig,
    pub search: CertificateSearch,
}

/// `start, start + step, ...` up to `stop` inclusive, rounded to 12 decimals
/// so that e.g. the third value of `0.1:4:0.1` is exactly `0.3`.
pub fn grid_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && stop.is_finite()) || stop < start {
        return Err(invalid(format!("bad range {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

impl SweepConfig {
    /// Full experimental grid for `dataset`: rho 0.1..4 step 0.1, input
    /// scale 1..30 step 1, 20 realizations, 100 units, L = 1000, T = 500,
    /// P = 50.
    pub fn paper(dataset: Dataset) -> Self {
        SweepConfig {
            dataset,
            rho_values: grid_range(0.1, 4.0, 0.1).unwrap(),
            scale_values: grid_range(1.0, 30.0, 1.0).unwrap(),
            n_seeds: 20,
            n_r: 100,
            esp: EspIndexConfig::default(),
            base_seed: 0,
            train_len: dataset.default_train_len(),
            test_len: dataset.default_test_len(),
            washout: dataset.default_washout(),
            readout: ReadoutConfig::default(),
            search: CertificateSearch::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho_values.is_empty() || self.scale_values.is_empty() {
            return Err(invalid("rho and scale grids must be non-empty"));
        }
        if self
            .rho_values
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(invalid("rho values must be finite and >= 0"));
        }
        if self
            .scale_values
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(invalid("scale values must be finite and >= 0"));
        }
        if self.n_seeds == 0 || self.n_r == 0 {
            return Err(invalid("n_seeds and n_r must be positive"));
        }
        self.esp.validate()
    }

    pub fn n_records(&self) -> usize {
        self.rho_values.len() * self.scale_values.len() * self.n_seeds
    }

    pub fn realization_seed(&self, rho_index: usize, scale_index: usize, k: usize) -> u64 {
        mix(
            self.base_seed,
            &[rho_index as u64, scale_index as u64, k as u64],
        )
    }

    /// Flat `key = value` lines; the inverse of [`SweepConfig::from_kv`].
    pub fn to_kv(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("dataset", self.dataset.to_string());
        kv("rho", list(&self.rho_values));
        kv("scale", list(&self.scale_values));
        kv("n_seeds", self.n_seeds.to_string());
        kv("n_r", self.n_r.to_string());
        kv("esp_horizon", self.esp.horizon.to_string());
        kv("esp_transient", self.esp.transient.to_string());
        kv("esp_trials", self.esp.p_trials.to_string());
        kv("base_seed", self.base_seed.to_string());
        kv("train_len", self.train_len.to_string());
        kv("test_len", self.test_len.to_string());
        kv("washout", self.washout.to_string());
        kv("lambda_grid", list(&self.readout.lambda_grid));
        kv("val_fraction", self.readout.val_fraction.to_string());
        kv("schur_max_iters", self.search.max_iters.to_string());
        kv("schur_eps", self.search.eps.to_string());
        s
    }

    /// Parses flat `key = value` text. Blank lines and `#` comments are
    /// skipped; `dataset` (if present) selects the defaults that the other
    /// keys override. Lists are comma separated or `start:stop:step`.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            pairs.push((i + 1, k.trim().to_owned(), v.trim().to_owned()));
        }
        let dataset = pairs
            .iter()
            .find(|(_, k, _)| k == "dataset")
            .map(|(_, _, v)| v.parse::<Dataset>())
            .transpose()
            .map_err(|e| Error::Config(e.to_string()))?
            .unwrap_or(Dataset::Laser);
        let mut cfg = SweepConfig::paper(dataset);
        for (line, k, v) in pairs {
            let bad = |what: &str| Error::Config(format!("line {line}: bad {what} value {v:?}"));
            let num = |v: &str| v.parse::<usize>().map_err(|_| bad(&k));
            let real = |v: &str| v.parse::<f64>().map_err(|_| bad(&k));
            match k.as_str() {
                "dataset" => {}
                "rho" => cfg.rho_values = parse_list(&v).map_err(|_| bad(&k))?,
                "scale" => cfg.scale_values = parse_list(&v).map_err(|_| bad(&k))?,
                "n_seeds" => cfg.n_seeds = num(&v)?,
                "n_r" => cfg.n_r = num(&v)?,
                "esp_horizon" => cfg.esp.horizon = num(&v)?,
                "esp_transient" => cfg.esp.transient = num(&v)?,
                "esp_trials" => cfg.esp.p_trials = num(&v)?,
                "base_seed" => cfg.base_seed = v.parse().map_err(|_| bad(&k))?,
                "train_len" => cfg.train_len = num(&v)?,
                "test_len" => cfg.test_len = num(&v)?,
                "washout" => cfg.washout = num(&v)?,
                "lambda_grid" => cfg.readout.lambda_grid = parse_list(&v).map_err(|_| bad(&k))?,
                "val_fraction" => cfg.readout.val_fraction = real(&v)?,
                "schur_max_iters" => cfg.search.max_iters = num(&v)?,
                "schur_eps" => cfg.search.eps = real(&v)?,
                other => return Err(Error::Config(format!("line {line}: unknown key {other:?}"))),
            }
        }
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self::paper(Dataset::Laser)
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| invalid(format!("bad number {s:?}")))
    };
    match parts.as_slice() {
        [a, b, c] => grid_range(num(a)?, num(b)?, num(c)?),
        [_] => v.split(',').map(|s| num(s.trim())).collect(),
        _ => Err(invalid(format!("bad list {v:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub rho: f64,
    pub input_scale: f64,
    pub seed_index: usize,
    pub esp_index: f64,
    pub necessary_holds: bool,
    pub schur_status: SchurStatus,
    pub input_condition_holds: bool,
    pub lambda_used: f64,
    pub train_mse: f64,
    pub test_mse: f64,
    /// Set on sentinel rows for failed cells; numeric fields are then NaN.
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(rho: f64, input_scale: f64, seed_index: usize, err: &Error) -> Self {
        SweepRecord {
            rho,
            input_scale,
            seed_index,
            esp_index: f64::NAN,
            necessary_holds: false,
            schur_status: SchurStatus::Unknown,
            input_condition_holds: false,
            lambda_used: f64::NAN,
            train_mse: f64::NAN,
            test_mse: f64::NAN,
            error: Some(err.to_string()),
        }
    }

    pub fn key(&self) -> RecordKey {
        RecordKey(
            self.rho.to_bits(),
            self.input_scale.to_bits(),
            self.seed_index,
        )
    }

    pub fn sufficient_holds(&self) -> bool {
        self.schur_status == SchurStatus::Certified || self.input_condition_holds
    }

    fn sort_key(&self) -> (f64, f64, usize) {
        (self.rho, self.input_scale, self.seed_index)
    }

    fn to_row(&self) -> String {
        let b = |x: bool| if x { "1" } else { "0" };
        let err = self
            .error
            .as_deref()
            .map(|e| e.replace([',', '\n', '\r'], " "))
            .unwrap_or_default();
        format!(
            "{:.16e},{:.16e},{},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{}",
            self.rho,
            self.input_scale,
            self.seed_index,
            self.esp_index,
            b(self.necessary_holds),
            self.schur_status,
            b(self.input_condition_holds),
            self.lambda_used,
            self.train_mse,
            self.test_mse,
            err
        )
    }

    fn from_row(row: &str) -> std::result::Result<Self, String> {
        let f: Vec<&str> = row.split(',').collect();
        if f.len() != COLUMNS.len() {
            return Err(format!(
                "expected {} fields, found {}",
                COLUMNS.len(),
                f.len()
            ));
        }
        let real = |i: usize| {
            f[i].parse::<f64>()
                .map_err(|_| format!("{}: bad number {:?}", COLUMNS[i], f[i]))
        };
        let flag = |i: usize| match f[i] {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(format!("{}: bad flag {other:?}", COLUMNS[i])),
        };
        Ok(SweepRecord {
            rho: real(0)?,
            input_scale: real(1)?,
            seed_index: f[2]
                .parse()
                .map_err(|_| format!("seed_index: bad value {:?}", f[2]))?,
            esp_index: real(3)?,
            necessary_holds: flag(4)?,
            schur_status: SchurStatus::from_str(f[5])?,
            input_condition_holds: flag(6)?,
            lambda_used: real(7)?,
            train_mse: real(8)?,
            test_mse: real(9)?,
            error: (!f[10].is_empty()).then(|| f[10].to_owned()),
        })
    }
}

/// Identity of one (cell, realization) by exact grid values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey(u64, u64, usize);

/// Per-cell means over realizations that did not fail.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub rho: f64,
    pub input_scale: f64,
    pub mean_esp_index: f64,
    pub mean_train_mse: f64,
    pub mean_test_mse: f64,
    /// `log10` of `mean_test_mse`.
    pub log10_test_mse: f64,
    /// Every realization satisfies the necessary condition.
    pub necessary_all: bool,
    /// Every realization satisfies at least one sufficient condition.
    pub sufficient_all: bool,
    pub n_ok: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResults {
    pub config: SweepConfig,
    /// Sorted by `(rho, input_scale, seed_index)`.
    pub records: Vec<SweepRecord>,
    /// Row-major over `(rho_values, scale_values)`.
    pub cells: Vec<CellSummary>,
    /// Mean ESP index per cell divided by the grid maximum.
    pub normalized_index: Vec<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

impl SweepResults {
    pub fn new(config: SweepConfig, mut records: Vec<SweepRecord>) -> Self {
        records.sort_by(|a, b| {
            let (ka, kb) = (a.sort_key(), b.sort_key());
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.cmp(&kb.2))
        });
        let mut by_cell: BTreeMap<(u64, u64), Vec<&SweepRecord>> = BTreeMap::new();
        for r in &records {
            by_cell
                .entry((r.rho.to_bits(), r.input_scale.to_bits()))
                .or_default()
                .push(r);
        }
        let mut cells = Vec::with_capacity(config.rho_values.len() * config.scale_values.len());
        for &rho in &config.rho_values {
            for &scale in &config.scale_values {
                let rs = by_cell
                    .get(&(rho.to_bits(), scale.to_bits()))
                    .cloned()
                    .unwrap_or_default();
                let ok: Vec<&SweepRecord> =
                    rs.iter().copied().filter(|r| r.error.is_none()).collect();
                let mean_test_mse = mean(ok.iter().map(|r| r.test_mse));
                cells.push(CellSummary {
                    rho,
                    input_scale: scale,
                    mean_esp_index: mean(ok.iter().map(|r| r.esp_index)),
                    mean_train_mse: mean(ok.iter().map(|r| r.train_mse)),
                    mean_test_mse,
                    log10_test_mse: crate::readout::log10_mse(mean_test_mse),
                    necessary_all: !ok.is_empty() && ok.iter().all(|r| r.necessary_holds),
                    sufficient_all: !ok.is_empty() && ok.iter().all(|r| r.sufficient_holds()),
                    n_ok: ok.len(),
                    n_failed: rs.len() - ok.len(),
                });
            }
        }
        let normalized_index =
            normalize_index_grid(&cells.iter().map(|c| c.mean_esp_index).collect::<Vec<_>>());
        SweepResults {
            config,
            records,
            cells,
            normalized_index,
        }
    }

    pub fn cell(&self, rho_index: usize, scale_index: usize) -> &CellSummary {
        &self.cells[rho_index * self.config.scale_values.len() + scale_index]
    }
}

/// Divides every cell by the grid maximum; an all-zero grid is returned
/// unchanged and NaN cells stay NaN.
pub fn normalize_index_grid(values: &[f64]) -> Vec<f64> {
    let max = values
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(0.0, f64::max);
    if max == 0.0 {
        return values.to_vec();
    }
    values.iter().map(|v| v / max).collect()
}

/// Runs one realization of one cell; failures become sentinel rows.
pub fn run_cell(
    cfg: &SweepConfig,
    signal: &Signal,
    task: &NextStepTask,
    rho_index: usize,
    scale_index: usize,
    k: usize,
) -> SweepRecord {
    let rho = cfg.rho_values[rho_index];
    let scale = cfg.scale_values[scale_index];
    let seed = cfg.realization_seed(rho_index, scale_index, k);
    let run = || -> Result<SweepRecord> {
        let p = init_reservoir(cfg.n_r, signal.dim(), rho, scale, seed)?;
        let esp = esp_index(
            &p,
            signal,
            &EspIndexConfig {
                seed,
                ..cfg.esp.clone()
            },
        )?;
        let cond = evaluate_conditions(&p, signal, cfg.esp.horizon, &cfg.search)?;
        let eval = evaluate_next_step(&p, task, &cfg.readout)?;
        Ok(SweepRecord {
            rho,
            input_scale: scale,
            seed_index: k,
            esp_index: esp.index,
            necessary_holds: cond.necessary_holds,
            schur_status: cond.schur_status,
            input_condition_holds: cond.input_condition_holds,
            lambda_used: eval.weights.lambda,
            train_mse: eval.train_mse,
            test_mse: eval.test_mse,
            error: None,
        })
    };
    run().unwrap_or_else(|e| SweepRecord::failed(rho, scale, k, &e))
}

/// How a sweep is executed.
#[derive(Debug, Clone, Default)]
pub struct ExecOptions {
    /// Worker threads; 0 uses the global rayon pool.
    pub threads: usize,
    /// Results file. Existing compatible files are resumed: completed
    /// (cell, realization) pairs are skipped and new records are appended as
    /// they finish. The file is rewritten sorted at the end.
    pub out: Option<PathBuf>,
}

pub fn run_sweep(cfg: &SweepConfig, signal: &Signal, task: &NextStepTask) -> Result<SweepResults> {
    execute(cfg, signal, task, &ExecOptions::default())
}

pub fn execute(
    cfg: &SweepConfig,
    signal: &Signal,
    task: &NextStepTask,
    opts: &ExecOptions,
) -> Result<SweepResults> {
    cfg.validate()?;
    if signal.len() < cfg.esp.horizon {
        return Err(invalid(format!(
            "signal has {} steps, ESP horizon needs {}",
            signal.len(),
            cfg.esp.horizon
        )));
    }
    if task.train_inputs.dim() != signal.dim() {
        return Err(invalid("task and signal dimensions differ"));
    }

    let (mut records, journal) = match &opts.out {
        Some(path) => {
            let (done, file) = open_journal(path, cfg)?;
            (done, Some(Mutex::new(BufWriter::new(file))))
        }
        None => (Vec::new(), None),
    };
    let done: HashSet<RecordKey> = records.iter().map(SweepRecord::key).collect();

    let mut work = Vec::new();
    for (i, &rho) in cfg.rho_values.iter().enumerate() {
        for (j, &scale) in cfg.scale_values.iter().enumerate() {
            for k in 0..cfg.n_seeds {
                if !done.contains(&RecordKey(rho.to_bits(), scale.to_bits(), k)) {
                    work.push((i, j, k));
                }
            }
        }
    }

    let compute = || -> Result<Vec<SweepRecord>> {
        work.par_iter()
            .map(|&(i, j, k)| {
                let rec = run_cell(cfg, signal, task, i, j, k);
                if let Some(j) = &journal {
                    let mut w = j.lock().expect("journal lock poisoned");
                    writeln!(w, "{}", rec.to_row())?;
                    w.flush()?;
                }
                Ok(rec)
            })
            .collect()
    };
    let fresh = if opts.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?
            .install(compute)?
    } else {
        compute()?
    };
    drop(journal);
    records.extend(fresh);

    // Keep only records on the current grid (a resumed file may hold extra seeds).
    let wanted: HashSet<RecordKey> = cfg
        .rho_values
        .iter()
        .flat_map(|r| {
            cfg.scale_values.iter().flat_map(move |s| {
                (0..cfg.n_seeds).map(move |k| RecordKey(r.to_bits(), s.to_bits(), k))
            })
        })
        .collect();
    records.retain(|r| wanted.contains(&r.key()));
    let results = SweepResults::new(cfg.clone(), records);
    if let Some(path) = &opts.out {
        write_results(&results, path)?;
    }
    Ok(results)
}

fn header(cfg: &SweepConfig) -> String {
    let mut s = format!("{MAGIC}{SCHEMA_VERSION}\n");
    for line in cfg.to_kv().lines() {
        s.push_str("# ");
        s.push_str(line);
        s.push('\n');
    }
    s.push_str(&COLUMNS.join(","));
    s.push('\n');
    s
}

/// Writes the results file: a version line, the configuration as `# key = value`
/// comment lines, the column header, then one sorted row per record.
pub fn write_results(results: &SweepResults, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(header(&results.config).as_bytes())?;
        for r in &results.records {
            writeln!(w, "{}", r.to_row())?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema {
        version: SCHEMA_VERSION,
        msg: msg.into(),
    }
}

/// Parses results text. With `allow_partial_tail`, an unterminated last
/// line (an interrupted append) is ignored instead of rejected.
fn parse_results(text: &str, allow_partial_tail: bool) -> Result<(SweepConfig, Vec<SweepRecord>)> {
    let mut lines = text.split_inclusive('\n').enumerate();
    let first = lines.next().map(|(_, l)| l.trim_end()).unwrap_or("");
    let version = first
        .strip_prefix(MAGIC)
        .ok_or_else(|| schema(format!("missing {MAGIC}{SCHEMA_VERSION} marker")))?;
    match version.parse::<u32>() {
        Ok(SCHEMA_VERSION) => {}
        Ok(v) => {
            return Err(Error::Schema {
                version: SCHEMA_VERSION,
                msg: format!("file has schema v{v}"),
            })
        }
        Err(_) => return Err(schema(format!("bad version marker {first:?}"))),
    }
    let mut kv = String::new();
    let mut header_seen = false;
    let mut records = Vec::new();
    for (i, raw) in lines {
        let complete = raw.ends_with('\n');
        let line = raw.trim_end_matches(['\n', '\r']);
        if !header_seen {
            if let Some(rest) = line.strip_prefix('#') {
                kv.push_str(rest.trim());
                kv.push('\n');
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols != COLUMNS {
                let unknown: Vec<&&str> = cols.iter().filter(|c| !COLUMNS.contains(c)).collect();
                return Err(schema(if unknown.is_empty() {
                    format!("header {line:?} does not match the expected columns")
                } else {
                    format!("unknown column(s) {unknown:?}")
                }));
            }
            header_seen = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        match SweepRecord::from_row(line) {
            Ok(r) => records.push(r),
            Err(_) if allow_partial_tail && !complete => break,
            Err(e) => return Err(schema(format!("line {}: {e}", i + 1))),
        }
    }
    if !header_seen {
        return Err(schema("missing column header"));
    }
    let cfg = SweepConfig::from_kv(&kv).map_err(|e| schema(format!("config echo: {e}")))?;
    Ok((cfg, records))
}

pub fn read_results(path: &Path) -> Result<SweepResults> {
    let text = fs::read_to_string(path)?;
    let (cfg, records) = parse_results(&text, false)?;
    Ok(SweepResults::new(cfg, records))
}

/// Opens (or creates) an append journal for `cfg`. Returns the records
/// already present. A partial trailing line is cut off so appends start on
/// a fresh line.
fn open_journal(path: &Path, cfg: &SweepConfig) -> Result<(Vec<SweepRecord>, File)> {
    if path.exists() {
        let text = fs::read_to_string(path)?;
        let (old_cfg, records) = parse_results(&text, true)?;
        let same_run = SweepConfig {
            rho_values: cfg.rho_values.clone(),
            scale_values: cfg.scale_values.clone(),
            n_seeds: cfg.n_seeds,
            ..old_cfg.clone()
        };
        if same_run.to_kv() != cfg.to_kv() {
            return Err(Error::Config(format!(
                "{} was produced with a different configuration; refusing to resume",
                path.display()
            )));
        }
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        let file = OpenOptions::new().write(true).open(path)?;
        file.set_len(keep as u64)?;
        let mut file = OpenOptions::new().append(true).open(path)?;
        file.flush()?;
        Ok((records, file))
    } else {
        let mut file = File::create(path)?;
        file.write_all(header(cfg).as_bytes())?;
        Ok((Vec::new(), file))
    }
}

/// Per-cell summary table (`rho,input_scale,mean_esp_index,normalized_esp_index,...`).
pub fn write_cell_summary(results: &SweepResults, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "rho,input_scale,mean_esp_index,normalized_esp_index,mean_train_mse,mean_test_mse,log10_test_mse,necessary_all,sufficient_all,n_ok,n_failed"
    )?;
    for (c, norm) in results.cells.iter().zip(&results.normalized_index) {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{}",
            c.rho,
            c.input_scale,
            c.mean_esp_index,
            norm,
            c.mean_train_mse,
            c.mean_test_mse,
            c.log10_test_mse,
            u8::from(c.necessary_all),
            u8::from(c.sufficient_all),
            c.n_ok,
            c.n_failed
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Whether a mean ESP index counts as zero.
pub fn index_is_zero(index: f64) -> bool {
    index <= DEFAULT_ESP_TOL
}
