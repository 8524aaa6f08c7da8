//! Static SVG line charts from `results.csv`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{CliError, Result};
use crate::results::Table;
use crate::summary::mean_ci95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotSpec {
    EffVsPairs,
    EffVsSnr,
    DelayVsLambda,
    DelayVsSnr,
    CompareEff,
    CompareDelay,
}

struct Axis {
    column: &'static str,
    label: &'static str,
}

const PAIRS: Axis = Axis {
    column: "num_pairs",
    label: "Number of node pairs",
};
const SNR: Axis = Axis {
    column: "snr_db",
    label: "SNR (dB)",
};
const LAMBDA: Axis = Axis {
    column: "lambda",
    label: "Arrival rate λ",
};
const EFF: Axis = Axis {
    column: "efficiency",
    label: "Efficiency n/(n+k+m)",
};
const DELAY: Axis = Axis {
    column: "mean_access_delay_us",
    label: "Mean access delay (µs)",
};

const GROUP_COLUMNS: [&str; 5] = ["protocol", "topology", "num_pairs", "snr_db", "lambda"];

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

impl PlotSpec {
    fn axes(self) -> (Axis, Axis, &'static str) {
        match self {
            PlotSpec::EffVsPairs => (PAIRS, EFF, "Efficiency vs number of node pairs"),
            PlotSpec::EffVsSnr => (SNR, EFF, "Efficiency vs SNR"),
            PlotSpec::DelayVsLambda => (LAMBDA, DELAY, "Average access delay vs arrival rate"),
            PlotSpec::DelayVsSnr => (SNR, DELAY, "Average access delay vs SNR"),
            PlotSpec::CompareEff => (PAIRS, EFF, "Efficiency: GSD-MA vs CSMA-CA"),
            PlotSpec::CompareDelay => (LAMBDA, DELAY, "Access delay: GSD-MA vs CSMA-CA"),
        }
    }
}

/// One plotted series: x -> (mean, CI95 half-width).
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64, f64)>,
}

fn parse_num(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Groups rows into series keyed by every grouping column that varies,
/// averaging seeds at each x.
pub fn build_series(table: &Table, spec: PlotSpec) -> Result<Vec<Series>> {
    let (x, y, _) = spec.axes();
    let need = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| CliError::config(format!("CSV lacks the `{name}` column needed for this plot")))
    };
    let xi = need(x.column)?;
    let yi = need(y.column)?;
    if table.rows.is_empty() {
        return Err(CliError::config("CSV has no rows to plot"));
    }
    let groups: Vec<(&str, usize)> = GROUP_COLUMNS
        .iter()
        .filter(|c| **c != x.column)
        .filter_map(|c| table.column(c).map(|i| (*c, i)))
        .filter(|&(_, i)| {
            let first = &table.rows[0][i];
            table.rows.iter().any(|r| &r[i] != first)
        })
        .collect();

    // Keep first-appearance order of series for stable colors.
    let mut order: Vec<String> = Vec::new();
    let mut data: BTreeMap<String, BTreeMap<u64, (f64, Vec<f64>)>> = BTreeMap::new();
    for row in &table.rows {
        let (Some(xv), Some(yv)) = (parse_num(&row[xi]), parse_num(&row[yi])) else {
            continue;
        };
        let label = if groups.is_empty() {
            y.column.to_string()
        } else {
            groups
                .iter()
                .map(|&(c, i)| format!("{}={}", short(c), row[i]))
                .collect::<Vec<_>>()
                .join(", ")
        };
        if !data.contains_key(&label) {
            order.push(label.clone());
        }
        data.entry(label)
            .or_default()
            .entry(xv.to_bits())
            .or_insert_with(|| (xv, Vec::new()))
            .1
            .push(yv);
    }
    if order.is_empty() {
        return Err(CliError::config(format!(
            "no numeric `{}` / `{}` values to plot",
            x.column, y.column
        )));
    }
    Ok(order
        .into_iter()
        .map(|label| {
            let mut points: Vec<(f64, f64, f64)> = data[&label]
                .values()
                .map(|(xv, ys)| {
                    let (m, ci) = mean_ci95(ys).expect("non-empty");
                    (*xv, m, ci.unwrap_or(0.0))
                })
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { label, points }
        })
        .collect())
}

fn short(column: &str) -> &str {
    match column {
        "num_pairs" => "pairs",
        "snr_db" => "SNR",
        "lambda" => "λ",
        other => other,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64, f64) {
    let (lo, hi) = if (hi - lo).abs() < 1e-12 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    };
    let step = nice_step(hi - lo);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn fmt_tick(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    };
    format!("{v:.decimals$}")
}

pub fn render_svg(series: &[Series], spec: PlotSpec) -> String {
    let (xa, ya, title) = spec.axes();
    let (w, h) = (760.0, 480.0);
    let (ml, mr, mt, mb) = (80.0, 200.0, 50.0, 60.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);

    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().flat_map(|p| [p.1 - p.2, p.1 + p.2]));
    let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (x0, x1, xstep) = nice_range(xmin, xmax);
    let (y0, y1, ystep) = nice_range(ymin.min(if ya.column == "efficiency" { ymin } else { 0.0 }), ymax);
    let sx = |v: f64| ml + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| mt + ph - (v - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">
<rect width="{w}" height="{h}" fill="white"/>
<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        ml + pw / 2.0,
        escape(title)
    );
    // Grid and ticks.
    let mut v = x0;
    while v <= x1 + xstep * 1e-6 {
        let x = sx(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{mt}" x2="{x:.2}" y2="{:.2}" stroke="#e5e5e5"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            mt + ph,
            mt + ph + 18.0,
            fmt_tick(v, xstep)
        );
        v += xstep;
    }
    let mut v = y0;
    while v <= y1 + ystep * 1e-6 {
        let y = sy(v);
        let _ = writeln!(
            s,
            r##"<line x1="{ml}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e5e5e5"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            ml + pw,
            ml - 8.0,
            y + 4.0,
            fmt_tick(v, ystep)
        );
        v += ystep;
    }
    let _ = writeln!(
        s,
        r##"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>
<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>
<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"##,
        ml + pw / 2.0,
        h - 15.0,
        escape(xa.label),
        mt + ph / 2.0,
        mt + ph / 2.0,
        escape(ya.label)
    );

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        for &(x, y, ci) in &ser.points {
            let (px, py) = (sx(x), sy(y));
            if ci > 0.0 {
                let (top, bot) = (sy(y + ci), sy(y - ci));
                let _ = writeln!(
                    s,
                    r#"<path d="M{px:.2},{top:.2}V{bot:.2}M{:.2},{top:.2}H{:.2}M{:.2},{bot:.2}H{:.2}" stroke="{color}" fill="none"/>"#,
                    px - 4.0,
                    px + 4.0,
                    px - 4.0,
                    px + 4.0
                );
            }
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}"/>"#);
        }
        let ly = mt + 10.0 + i as f64 * 20.0;
        let lx = ml + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}
