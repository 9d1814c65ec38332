//! Benchmark series loaders and next-step prediction tasks.
//!
//! Two input formats are read:
//!
//! * plain series: one or more real numbers per line, whitespace separated
//!   (the Santa Fe laser file, and the canonical format written by
//!   [`write_series`]);
//! * SILSO monthly mean total sunspot number: fields `year; month; decimal
//!   date; mean; std; observations; provisional`, separated by `;` (the CSV
//!   release) or by whitespace (the TXT release).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::reservoir::Signal;

/// Sunspot values are divided by this before use.
pub const SUNSPOT_SCALE: f64 = 1000.0;

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(invalid(format!("month {month} out of range 1..=12")));
        }
        Ok(YearMonth { year, month })
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    /// Number of months in `[self, to]`, both inclusive.
    pub fn months_through(self, to: YearMonth) -> i64 {
        to.ordinal() - self.ordinal() + 1
    }

    fn next(self) -> YearMonth {
        if self.month == 12 {
            YearMonth {
                year: self.year + 1,
                month: 1,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month + 1,
            }
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| invalid(format!("expected YYYY-MM, got {s:?}")))?;
        let year = y
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad year in {s:?}")))?;
        let month = m
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad month in {s:?}")))?;
        YearMonth::new(year, month)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Data {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}

/// Plain univariate series; values are used as stored.
pub fn load_laser(path: &Path) -> Result<Signal> {
    let text = read(path)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                msg: format!("not a number: {tok:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line: i + 1,
                    msg: format!("non-finite value {tok:?}"),
                });
            }
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(Error::Data {
            path: path.to_owned(),
            msg: "no values".into(),
        });
    }
    Signal::univariate(values)
}

/// Canonical series format: one value per line, 17 significant digits.
pub fn write_series(path: &Path, s: &Signal) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for v in s.values() {
        writeln!(out, "{v:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

/// Monthly means from a SILSO file for `from..=to`, divided by
/// [`SUNSPOT_SCALE`]. Every month in the range must be present once, in
/// order, with a non-negative mean.
pub fn load_sunspot_silso(path: &Path, from: YearMonth, to: YearMonth) -> Result<Signal> {
    if to < from {
        return Err(invalid(format!("empty month range {from}..{to}")));
    }
    let text = read(path)?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_owned(),
        line,
        msg,
    };
    let mut expected = from;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = if line.contains(';') {
            line.split(';').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        if fields.len() < 4 {
            return Err(parse_err(
                row,
                format!("expected at least 4 fields, found {}", fields.len()),
            ));
        }
        let year: i32 = fields[0]
            .parse()
            .map_err(|_| parse_err(row, format!("bad year {:?}", fields[0])))?;
        let month: u32 = fields[1]
            .parse()
            .map_err(|_| parse_err(row, format!("bad month {:?}", fields[1])))?;
        let ym = YearMonth::new(year, month).map_err(|e| parse_err(row, e.to_string()))?;
        let mean: f64 = fields[3]
            .parse()
            .map_err(|_| parse_err(row, format!("bad monthly mean {:?}", fields[3])))?;
        if ym < from || ym > to {
            continue;
        }
        if ym != expected {
            return Err(Error::Data {
                path: path.to_owned(),
                msg: if ym > expected {
                    format!("missing month {expected} (row {row} is {ym})")
                } else {
                    format!("month {ym} out of order or repeated at row {row}")
                },
            });
        }
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(Error::Data {
                path: path.to_owned(),
                msg: format!("missing value (sentinel {mean}) for month {ym}"),
            });
        }
        values.push(mean / SUNSPOT_SCALE);
        expected = expected.next();
    }
    if expected <= to {
        return Err(Error::Data {
            path: path.to_owned(),
            msg: format!("missing month {expected}: file ends before {to}"),
        });
    }
    Signal::univariate(values)
}

/// One-step-ahead prediction: input `u(t)`, target `u(t+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NextStepTask {
    pub train_inputs: Signal,
    pub train_targets: Signal,
    pub test_inputs: Signal,
    pub test_targets: Signal,
    /// Leading training steps excluded from the readout fit.
    pub washout: usize,
}

impl NextStepTask {
    pub fn train_len(&self) -> usize {
        self.train_inputs.len()
    }

    pub fn test_len(&self) -> usize {
        self.test_inputs.len()
    }
}

/// Splits `s` into `train_len` training pairs followed by `test_len` test
/// pairs; the test run continues the training orbit.
pub fn make_next_step_task(
    s: &Signal,
    train_len: usize,
    test_len: usize,
    washout: usize,
) -> Result<NextStepTask> {
    if train_len == 0 || test_len == 0 {
        return Err(invalid("train and test lengths must be positive"));
    }
    if washout >= train_len {
        return Err(invalid(format!(
            "washout {washout} must be smaller than the training length {train_len}"
        )));
    }
    let required = train_len + test_len + 1;
    if s.len() < required {
        return Err(invalid(format!(
            "series too short: {train_len} train + {test_len} test pairs need {required} samples, have {}",
            s.len()
        )));
    }
    Ok(NextStepTask {
        train_inputs: s.slice(0, train_len),
        train_targets: s.slice(1, train_len + 1),
        test_inputs: s.slice(train_len, train_len + test_len),
        test_targets: s.slice(train_len + 1, train_len + test_len + 1),
        washout,
    })
}

/// The two benchmark datasets with their standard splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dataset {
    Laser,
    Sunspot,
}

impl Dataset {
    pub fn default_train_len(self) -> usize {
        match self {
            Dataset::Laser => 5000,
            Dataset::Sunspot => 3000,
        }
    }

    /// The sunspot range has 3237 months, i.e. 3236 input/target pairs.
    pub fn default_test_len(self) -> usize {
        match self {
            Dataset::Laser => 5092,
            Dataset::Sunspot => 236,
        }
    }

    pub fn default_washout(self) -> usize {
        1000
    }

    pub fn sunspot_range() -> (YearMonth, YearMonth) {
        (
            YearMonth {
                year: 1749,
                month: 1,
            },
            YearMonth {
                year: 2018,
                month: 9,
            },
        )
    }

    pub fn load(self, path: &Path) -> Result<Signal> {
        match self {
            Dataset::Laser => load_laser(path),
            Dataset::Sunspot => {
                let (from, to) = Self::sunspot_range();
                load_sunspot_silso(path, from, to)
            }
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dataset::Laser => "laser",
            Dataset::Sunspot => "sunspot",
        })
    }
}

impl FromStr for Dataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laser" => Ok(Dataset::Laser),
            "sunspot" => Ok(Dataset::Sunspot),
            other => Err(invalid(format!(
                "unknown dataset {other:?} (expected laser or sunspot)"
            ))),
        }
    }
}
