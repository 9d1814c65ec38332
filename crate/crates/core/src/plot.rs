//! SVG heatmaps of sweep results.
//!
//! One cell per (rho, input scale): rho grows upward, input scale to the
//! right. Gray level is linear in the plotted value, black for the smallest.
//! Two step polylines mark, per input-scale column, the top of the run of
//! cells (from the smallest rho up) in which every realization satisfies the
//! necessary condition, and the same for "either sufficient condition".

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::sweep::{CellSummary, SweepResults};

/// Color used for cells whose value is NaN (e.g. every realization failed).
pub const NAN_COLOR: &str = "#d62728";
const NECESSARY_COLOR: &str = "#1f77b4";
const SUFFICIENT_COLOR: &str = "#ff7f0e";
/// The log10(MSE) color ramp spans the data range clipped to this interval.
pub const LOG10_MSE_CLIP: (f64, f64) = (-8.0, 2.0);

const CELL: f64 = 14.0;
const LEFT: f64 = 64.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const LEGEND_W: f64 = 150.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Mean ESP index divided by the grid maximum.
    EspIndexNormalized,
    /// log10 of the mean test MSE.
    Log10TestMse,
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "esp_index_normalized" => Ok(Quantity::EspIndexNormalized),
            "log10_test_mse" => Ok(Quantity::Log10TestMse),
            other => Err(invalid(format!(
                "unknown quantity {other:?} (expected esp_index_normalized or log10_test_mse)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Necessary,
    Sufficient,
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// For each input-scale column (in ascending scale order), how many cells
/// from the smallest rho upward satisfy the condition in every realization.
pub fn boundary_heights(results: &SweepResults, which: Boundary) -> Vec<usize> {
    let cfg = &results.config;
    let rows = sorted_order(&cfg.rho_values);
    sorted_order(&cfg.scale_values)
        .into_iter()
        .map(|j| {
            rows.iter()
                .take_while(|&&i| {
                    let c = results.cell(i, j);
                    match which {
                        Boundary::Necessary => c.necessary_all,
                        Boundary::Sufficient => c.sufficient_all,
                    }
                })
                .count()
        })
        .collect()
}

fn value(results: &SweepResults, q: Quantity, i: usize, j: usize) -> f64 {
    match q {
        Quantity::EspIndexNormalized => {
            results.normalized_index[i * results.config.scale_values.len() + j]
        }
        Quantity::Log10TestMse => results.cell(i, j).log10_test_mse,
    }
}

/// Maps values to [0, 1] for the gray ramp. Returns the ramp range too.
fn ramp(results: &SweepResults, q: Quantity) -> (f64, f64) {
    match q {
        Quantity::EspIndexNormalized => (0.0, 1.0),
        Quantity::Log10TestMse => {
            let finite: Vec<f64> = results
                .cells
                .iter()
                .map(|c: &CellSummary| c.log10_test_mse)
                .filter(|v| v.is_finite())
                .collect();
            let lo = finite
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
                .max(LOG10_MSE_CLIP.0);
            let hi = finite
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
                .min(LOG10_MSE_CLIP.1);
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                let lo = if lo.is_finite() { lo } else { LOG10_MSE_CLIP.0 };
                (lo, lo + 1.0)
            } else {
                (lo, hi)
            }
        }
    }
}

fn gray(v: f64, lo: f64, hi: f64) -> String {
    if v.is_nan() {
        return NAN_COLOR.to_owned();
    }
    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    let g = (t * 255.0).round() as u8;
    format!("#{g:02x}{g:02x}{g:02x}")
}

fn label(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

/// Renders one heatmap as an SVG document.
pub fn render_heatmap(results: &SweepResults, q: Quantity) -> Result<String> {
    if results.records.is_empty() {
        return Err(invalid("no records to plot"));
    }
    let cfg = &results.config;
    let rows = sorted_order(&cfg.rho_values);
    let cols = sorted_order(&cfg.scale_values);
    let (nr, nc) = (rows.len() as f64, cols.len() as f64);
    let plot_w = nc * CELL;
    let plot_h = nr * CELL;
    let width = LEFT + plot_w + LEGEND_W;
    let height = TOP + plot_h + BOTTOM;
    let (lo, hi) = ramp(results, q);
    let title = match q {
        Quantity::EspIndexNormalized => format!("ESP index (normalized), {}", cfg.dataset),
        Quantity::Log10TestMse => format!("log10 test MSE, {}", cfg.dataset),
    };

    let mut s = String::new();
    let w = &mut s;
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="10">"#).unwrap();
    writeln!(
        w,
        r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="{:.1}" y="20" font-size="13">{title}</text>"#,
        LEFT
    )
    .unwrap();

    let x_of = |c: f64| LEFT + c * CELL;
    let y_of = |r: f64| TOP + plot_h - r * CELL;
    writeln!(w, r#"<g id="cells" shape-rendering="crispEdges">"#).unwrap();
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            let v = value(results, q, i, j);
            writeln!(
                w,
                r#"<rect x="{:.1}" y="{:.1}" width="{CELL:.1}" height="{CELL:.1}" fill="{}"><title>rho={} scale={} value={}</title></rect>"#,
                x_of(c as f64),
                y_of(r as f64 + 1.0),
                gray(v, lo, hi),
                cfg.rho_values[i],
                cfg.scale_values[j],
                v
            )
            .unwrap();
        }
    }
    writeln!(w, "</g>").unwrap();

    for (which, color, dash, id) in [
        (
            Boundary::Necessary,
            NECESSARY_COLOR,
            r#" stroke-dasharray="5,3""#,
            "necessary",
        ),
        (Boundary::Sufficient, SUFFICIENT_COLOR, "", "sufficient"),
    ] {
        let heights = boundary_heights(results, which);
        let mut pts = Vec::with_capacity(2 * heights.len());
        for (c, &h) in heights.iter().enumerate() {
            pts.push(format!("{:.1},{:.1}", x_of(c as f64), y_of(h as f64)));
            pts.push(format!("{:.1},{:.1}", x_of(c as f64 + 1.0), y_of(h as f64)));
        }
        writeln!(
            w,
            r#"<polyline id="{id}-boundary" points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
            pts.join(" ")
        )
        .unwrap();
    }

    // Axes and ticks; at most ~10 labels per axis.
    writeln!(w, r#"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="black"/>"#).unwrap();
    let every = |n: usize| n.div_ceil(10).max(1);
    for (r, &i) in rows
        .iter()
        .enumerate()
        .filter(|(r, _)| r % every(rows.len()) == 0)
    {
        writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            y_of(r as f64 + 0.5) + 3.5,
            label(cfg.rho_values[i])
        )
        .unwrap();
    }
    for (c, &j) in cols
        .iter()
        .enumerate()
        .filter(|(c, _)| c % every(cols.len()) == 0)
    {
        writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x_of(c as f64 + 0.5),
            TOP + plot_h + 14.0,
            label(cfg.scale_values[j])
        )
        .unwrap();
    }
    writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">input scaling</text>"#,
        LEFT + plot_w / 2.0,
        TOP + plot_h + 34.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">spectral radius</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )
    .unwrap();

    // Legend: gray ramp plus boundary keys.
    let lx = LEFT + plot_w + 20.0;
    writeln!(w, r##"<defs><linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0"><stop offset="0" stop-color="#000000"/><stop offset="1" stop-color="#ffffff"/></linearGradient></defs>"##).unwrap();
    writeln!(w, r#"<rect x="{lx:.1}" y="{TOP:.1}" width="14" height="100" fill="url(#ramp)" stroke="black"/>"#).unwrap();
    writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
        lx + 18.0,
        TOP + 8.0,
        label(hi)
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
        lx + 18.0,
        TOP + 100.0,
        label(lo)
    )
    .unwrap();
    let ky = TOP + 120.0;
    writeln!(w, r#"<line x1="{lx:.1}" y1="{ky:.1}" x2="{:.1}" y2="{ky:.1}" stroke="{NECESSARY_COLOR}" stroke-width="2" stroke-dasharray="5,3"/>"#, lx + 20.0).unwrap();
    writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}">necessary</text>"#,
        lx + 24.0,
        ky + 3.5
    )
    .unwrap();
    writeln!(w, r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{SUFFICIENT_COLOR}" stroke-width="2"/>"#, ky + 14.0, lx + 20.0, ky + 14.0).unwrap();
    writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}">sufficient</text>"#,
        lx + 24.0,
        ky + 17.5
    )
    .unwrap();
    writeln!(
        w,
        r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{NAN_COLOR}"/>"#,
        ky + 24.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}">no data</text>"#,
        lx + 24.0,
        ky + 33.0
    )
    .unwrap();
    writeln!(w, "</svg>").unwrap();
    Ok(s)
}
