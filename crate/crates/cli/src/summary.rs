//! Seed aggregation: mean and Student-t 95% interval per sweep point.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{CliError, Result};
use crate::results::ResultRow;

/// Mean and 95% half-width of `xs`; the half-width is absent below two samples.
pub fn mean_ci95(xs: &[f64]) -> Option<(f64, Option<f64>)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Some((mean, None));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .expect("dof is positive")
        .inverse_cdf(0.975);
    Some((mean, Some(t * (var / n).sqrt())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub protocol: String,
    pub num_pairs: usize,
    pub topology: String,
    pub snr_db: Option<f64>,
    pub lambda: f64,
    pub seeds: usize,
    pub efficiency: Option<(f64, Option<f64>)>,
    pub delay_us: Option<(f64, Option<f64>)>,
    pub packets_served: f64,
}

/// Groups consecutive rows sharing a `scenario_id`.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let id = &rows[start].scenario_id;
        let end = start + rows[start..].iter().take_while(|r| &r.scenario_id == id).count();
        let group = &rows[start..end];
        let first = &group[0];
        let eff: Vec<f64> = group.iter().filter_map(|r| r.efficiency).collect();
        let delay: Vec<f64> = group.iter().filter_map(|r| r.mean_access_delay_us).collect();
        out.push(SummaryRow {
            scenario_id: id.clone(),
            protocol: first.protocol.clone(),
            num_pairs: first.num_pairs,
            topology: first.topology.clone(),
            snr_db: first.snr_db,
            lambda: first.lambda,
            seeds: group.len(),
            efficiency: mean_ci95(&eff),
            delay_us: mean_ci95(&delay),
            packets_served: group.iter().map(|r| r.packets_served as f64).sum::<f64>() / group.len() as f64,
        });
        start = end;
    }
    out
}

pub const SUMMARY_COLUMNS: [&str; 12] = [
    "scenario_id",
    "protocol",
    "num_pairs",
    "topology",
    "snr_db",
    "lambda",
    "seeds",
    "efficiency_mean",
    "efficiency_ci95",
    "delay_mean_us",
    "delay_ci95_us",
    "packets_served_mean",
];

pub fn write_summary<W: std::io::Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(SUMMARY_COLUMNS).map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.scenario_id.clone(),
            r.protocol.clone(),
            r.num_pairs.to_string(),
            r.topology.clone(),
            opt(r.snr_db),
            r.lambda.to_string(),
            r.seeds.to_string(),
            opt(r.efficiency.map(|e| e.0)),
            opt(r.efficiency.and_then(|e| e.1)),
            opt(r.delay_us.map(|e| e.0)),
            opt(r.delay_us.and_then(|e| e.1)),
            r.packets_served.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
