//! Side-by-side GSD-MA / DCF runs on identical seeds and traffic.

use std::io::Write;

use gsdma_core::config::{validate, Protocol, TopologySpec, ValidatedConfig};

use crate::error::{CliError, Result};
use crate::results::ResultRow;
use crate::summary::{summarize, SummaryRow};
use crate::sweep::{run_grid, SweepPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scenario_id: String,
    pub topology: String,
    pub num_pairs: usize,
    pub snr_db: Option<f64>,
    pub lambda: f64,
    pub seeds: usize,
    pub gsdma: SummaryRow,
    pub csmaca: SummaryRow,
    /// GSD-MA over DCF.
    pub ratio_efficiency: Option<f64>,
    /// GSD-MA over DCF.
    pub ratio_delay: Option<f64>,
    /// `hidden / fully connected - 1`, only on hidden-node rows.
    pub gsdma_delay_inflation: Option<f64>,
    pub csmaca_delay_inflation: Option<f64>,
}

fn ratio(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    }
}

/// Points: both protocols on the given topology, plus a fully connected
/// baseline for both when the topology is the hidden-node layout.
pub fn comparison_points(name: &str, base: &ValidatedConfig) -> Result<Vec<SweepPoint>> {
    let mut variants = vec![base.topology.clone()];
    if let TopologySpec::HiddenNode { snr_db } = base.topology {
        variants.push(TopologySpec::FullyConnected { snr_db });
    }
    let mut points = Vec::new();
    for topology in variants {
        for protocol in [Protocol::GsdMa, Protocol::CsmaCa] {
            let mut c = base.config().clone();
            c.protocol = protocol;
            c.topology = topology.clone();
            let config = validate(c)?;
            points.push(SweepPoint {
                id: format!("{name}/{}/{}", topology.kind_name(), protocol.as_str()),
                config,
            });
        }
    }
    Ok(points)
}

pub fn run_comparison<W: Write + Send>(
    name: &str,
    base: &ValidatedConfig,
    seeds: &[u64],
    results_out: W,
) -> Result<(Vec<ResultRow>, Vec<ComparisonRow>)> {
    let points = comparison_points(name, base)?;
    let (rows, _) = run_grid(&points, seeds, results_out)?;
    let summary = summarize(&rows);
    let mut out = Vec::new();
    for pair in summary.chunks(2) {
        let [g, c] = pair else {
            return Err(CliError::config("incomplete comparison group"));
        };
        let eff = |s: &SummaryRow| s.efficiency.map(|e| e.0);
        let delay = |s: &SummaryRow| s.delay_us.map(|e| e.0);
        out.push(ComparisonRow {
            scenario_id: format!("{name}/{}", g.topology),
            topology: g.topology.clone(),
            num_pairs: g.num_pairs,
            snr_db: g.snr_db,
            lambda: g.lambda,
            seeds: g.seeds,
            ratio_efficiency: ratio(eff(g), eff(c)),
            ratio_delay: ratio(delay(g), delay(c)),
            gsdma: g.clone(),
            csmaca: c.clone(),
            gsdma_delay_inflation: None,
            csmaca_delay_inflation: None,
        });
    }
    if out.len() == 2 {
        let (hidden, full) = (&out[0], &out[1]);
        let inflation = |h: &SummaryRow, f: &SummaryRow| {
            ratio(h.delay_us.map(|d| d.0), f.delay_us.map(|d| d.0)).map(|r| r - 1.0)
        };
        let gi = inflation(&hidden.gsdma, &full.gsdma);
        let ci = inflation(&hidden.csmaca, &full.csmaca);
        out[0].gsdma_delay_inflation = gi;
        out[0].csmaca_delay_inflation = ci;
    }
    Ok((rows, out))
}

pub const COMPARISON_COLUMNS: [&str; 16] = [
    "scenario_id",
    "topology",
    "num_pairs",
    "snr_db",
    "lambda",
    "seeds",
    "gsdma_efficiency",
    "gsdma_efficiency_ci95",
    "csmaca_efficiency",
    "csmaca_efficiency_ci95",
    "ratio_efficiency",
    "gsdma_delay_us",
    "csmaca_delay_us",
    "ratio_delay",
    "gsdma_delay_inflation",
    "csmaca_delay_inflation",
];

pub fn write_comparison<W: Write>(out: W, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    w.write_record(COMPARISON_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record([
            r.scenario_id.clone(),
            r.topology.clone(),
            r.num_pairs.to_string(),
            opt(r.snr_db),
            r.lambda.to_string(),
            r.seeds.to_string(),
            opt(r.gsdma.efficiency.map(|e| e.0)),
            opt(r.gsdma.efficiency.and_then(|e| e.1)),
            opt(r.csmaca.efficiency.map(|e| e.0)),
            opt(r.csmaca.efficiency.and_then(|e| e.1)),
            opt(r.ratio_efficiency),
            opt(r.gsdma.delay_us.map(|e| e.0)),
            opt(r.csmaca.delay_us.map(|e| e.0)),
            opt(r.ratio_delay),
            opt(r.gsdma_delay_inflation),
            opt(r.csmaca_delay_inflation),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
