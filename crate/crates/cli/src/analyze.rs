//! The closed-form access model, from given or simulated parameters.

use std::io::Write;

use gsdma_core::analysis::{access_probability, estimate_params, first_access_cdf, mean_access_delay, AccessModelParams};
use gsdma_core::config::{Protocol, ValidatedConfig};
use gsdma_core::engine::run_traced;
use gsdma_core::gsdma::PriorityPolicy;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    /// `None` for hand-supplied parameters.
    pub pair: Option<usize>,
    pub params: AccessModelParams,
    pub p_access: f64,
    pub model_delay_us: f64,
    /// Simulated mean of `(first-access cycle - 1) * T_s`, when estimated.
    pub simulated_delay_us: Option<f64>,
    /// `Pr(first access within k cycles)` for k = 1..=cdf_cycles.
    pub cdf: Vec<f64>,
}

fn row(pair: Option<usize>, params: AccessModelParams, simulated: Option<f64>, cdf_cycles: u64) -> Result<AnalysisRow> {
    let model = |e: gsdma_core::analysis::AnalysisError| CliError::config(e.to_string());
    let p = access_probability(&params).map_err(model)?;
    let delay = mean_access_delay(p, params.t_s_us).map_err(model)?;
    let cdf = if p > 0.0 {
        (1..=cdf_cycles)
            .map(|k| first_access_cdf(p, k).map_err(model))
            .collect::<Result<_>>()?
    } else {
        vec![0.0; cdf_cycles as usize]
    };
    Ok(AnalysisRow {
        pair,
        params,
        p_access: p,
        model_delay_us: delay,
        simulated_delay_us: simulated,
        cdf,
    })
}

pub fn analyze_given(params: AccessModelParams, cdf_cycles: u64) -> Result<Vec<AnalysisRow>> {
    Ok(vec![row(None, params, None, cdf_cycles)?])
}

/// Runs the scenario traced, estimates per-node parameters and sets `T_s` to
/// the mean measured cycle duration.
pub fn analyze_scenario(cfg: &ValidatedConfig, cdf_cycles: u64) -> Result<Vec<AnalysisRow>> {
    if cfg.protocol != Protocol::GsdMa {
        return Err(CliError::config("analyze needs protocol = gsdma"));
    }
    let (_, trace) = run_traced(cfg)?;
    let measured: Vec<_> = trace.measured_cycles().collect();
    let slots: u64 = measured.iter().map(|c| c.len_slots).sum();
    let t_s_us = if measured.is_empty() {
        0.0
    } else {
        slots as f64 / measured.len() as f64 * cfg.slot_time_us
    };
    let policy = PriorityPolicy::from_scheme(&cfg.priority_scheme, cfg.num_pairs);
    let est = estimate_params(&trace, cfg.num_pairs, &policy, t_s_us)
        .map_err(|e| CliError::config(format!("cannot estimate parameters: {e}")))?;
    est.into_iter()
        .enumerate()
        .map(|(i, params)| {
            let samples = &trace.first_access[i];
            let simulated = (!samples.is_empty()).then(|| {
                samples.iter().map(|&c| f64::from(c - 1)).sum::<f64>() / samples.len() as f64 * t_s_us
            });
            row(Some(i), params, simulated, cdf_cycles)
        })
        .collect()
}

pub fn write_analysis<W: Write>(out: W, rows: &[AnalysisRow]) -> Result<()> {
    let cdf_len = rows.first().map_or(0, |r| r.cdf.len());
    let mut header: Vec<String> = [
        "pair",
        "p_s",
        "p_c",
        "p_p",
        "t_s_us",
        "p_access",
        "model_delay_us",
        "simulated_delay_us",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=cdf_len).map(|k| format!("cdf_{k}")));
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header).map_err(io)?;
    for r in rows {
        let mut rec = vec![
            r.pair.map(|p| p.to_string()).unwrap_or_default(),
            r.params.p_s.to_string(),
            r.params.p_c.to_string(),
            r.params.p_p.to_string(),
            r.params.t_s_us.to_string(),
            r.p_access.to_string(),
            r.model_delay_us.to_string(),
            r.simulated_delay_us.map(|d| d.to_string()).unwrap_or_default(),
        ];
        rec.extend(r.cdf.iter().map(|c| c.to_string()));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
