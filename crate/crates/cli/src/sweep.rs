//! Sweep files and the parallel, order-preserving sweep runner.
//!
//! A sweep file is a scenario file with one extra `[sweep]` section:
//!
//! ```text
//! protocol = gsdma
//! [sweep]
//! num_pairs = 1, 2, 3, 4
//! arrival_rate = 0.2, 0.5, 0.8
//! seeds = 1:10
//! ```
//!
//! Axis values are comma lists or inclusive `start:stop[:step]` ranges.
//! The run set is the Cartesian product of the axes times the seeds.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::mpsc;

use gsdma_core::channel::build_link_table;
use gsdma_core::config::{validate, Protocol, ScenarioConfig, TopologySpec, ValidatedConfig};
use gsdma_core::scenario_file::{ParseError, ScenarioSource};
use gsdma_core::MetricsReport;
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::results::{ResultRow, ResultWriter};

pub const DEFAULT_SEEDS: u64 = 10;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Axes {
    pub protocol: Vec<Protocol>,
    /// Named topology kinds; the base SNR carries over.
    pub topology: Vec<String>,
    pub num_pairs: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub arrival_rate: Vec<f64>,
}

impl Axes {
    pub fn is_empty(&self) -> bool {
        self.protocol.is_empty()
            && self.topology.is_empty()
            && self.num_pairs.is_empty()
            && self.snr_db.is_empty()
            && self.arrival_rate.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub axes: Axes,
    pub seeds: Vec<u64>,
}

/// One grid point, before seeds are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub id: String,
    pub config: ValidatedConfig,
}

fn parse_range(v: &str, line: usize) -> std::result::Result<Vec<f64>, ParseError> {
    let err = |reason: String| ParseError { line, reason };
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| err(format!("`{s}` is not a number")))
    };
    let (start, stop) = (num(parts[0])?, num(parts[1])?);
    let step = match parts.get(2) {
        Some(s) => num(s)?,
        None => 1.0,
    };
    if parts.len() > 3 || step <= 0.0 || stop < start {
        return Err(err(format!("range `{v}` must be start:stop[:step] with start <= stop and step > 0")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as u64 + 1;
    if count > 100_000 {
        return Err(err(format!("range `{v}` has too many values")));
    }
    // Index-based to avoid accumulating rounding error.
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn parse_values(v: &str, line: usize) -> std::result::Result<Vec<String>, ParseError> {
    let v = v.trim();
    if v.contains(':') {
        return Ok(parse_range(v, line)?.into_iter().map(|x| x.to_string()).collect());
    }
    let items: Vec<String> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    if items.is_empty() {
        return Err(ParseError {
            line,
            reason: "axis has no values".into(),
        });
    }
    Ok(items)
}

fn typed<T: std::str::FromStr>(items: &[String], key: &str, line: usize) -> std::result::Result<Vec<T>, ParseError> {
    items
        .iter()
        .map(|s| {
            s.parse().map_err(|_| ParseError {
                line,
                reason: format!("`{key}` value `{s}` is invalid"),
            })
        })
        .collect()
}

/// `(line, key, value)` from the `[sweep]` section.
type SweepLine = (usize, String, String);

/// Splits a sweep file into its scenario part and `[sweep]` assignments.
/// Sweep lines are blanked so scenario parse errors keep their line numbers.
fn split_sweep(text: &str) -> (String, Vec<SweepLine>, std::result::Result<(), ParseError>) {
    let mut scenario = String::new();
    let mut sweep = Vec::new();
    let mut in_sweep = false;
    let mut status = Ok(());
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.starts_with('[') {
            in_sweep = content == "[sweep]" || content.trim_matches(['[', ']']).trim() == "sweep";
            if in_sweep {
                scenario.push('\n');
                continue;
            }
        }
        if in_sweep {
            if !content.is_empty() {
                match content.split_once('=') {
                    Some((k, v)) => sweep.push((line, k.trim().to_string(), v.trim().to_string())),
                    None if status.is_ok() => {
                        status = Err(ParseError {
                            line,
                            reason: format!("expected `key = value`, got `{content}`"),
                        })
                    }
                    None => {}
                }
            }
            scenario.push('\n');
        } else {
            scenario.push_str(raw);
            scenario.push('\n');
        }
    }
    (scenario, sweep, status)
}

impl SweepSpec {
    /// Parses sweep file text. `overrides` apply to the base scenario.
    pub fn parse(text: &str, base_dir: Option<&Path>, overrides: &[String]) -> std::result::Result<Self, ParseError> {
        let (scenario_text, sweep_lines, status) = split_sweep(text);
        status?;
        let mut src = ScenarioSource::parse(&scenario_text)?;
        for o in overrides {
            src.set(o)?;
        }
        let base = src.build(base_dir)?;

        let mut axes = Axes::default();
        let mut seeds = None;
        let mut seen = BTreeMap::new();
        for (line, key, value) in sweep_lines {
            let key = if key == "lambda" { "arrival_rate".to_string() } else { key };
            if let Some(first) = seen.insert(key.clone(), line) {
                return Err(ParseError {
                    line,
                    reason: format!("`{key}` already set on line {first}"),
                });
            }
            let items = parse_values(&value, line)?;
            match key.as_str() {
                "protocol" => {
                    axes.protocol = items
                        .iter()
                        .map(|s| {
                            Protocol::parse(s).ok_or_else(|| ParseError {
                                line,
                                reason: format!("unknown protocol `{s}`"),
                            })
                        })
                        .collect::<std::result::Result<_, _>>()?
                }
                "topology" => {
                    for s in &items {
                        if !matches!(s.as_str(), "fully_connected" | "hidden_node" | "exposed_node") {
                            return Err(ParseError {
                                line,
                                reason: format!("topology axis accepts named layouts only, got `{s}`"),
                            });
                        }
                    }
                    axes.topology = items;
                }
                "num_pairs" => axes.num_pairs = typed(&items, &key, line)?,
                "snr_db" => axes.snr_db = typed(&items, &key, line)?,
                "arrival_rate" => axes.arrival_rate = typed(&items, &key, line)?,
                "seeds" => seeds = Some(typed::<u64>(&items, &key, line)?),
                other => {
                    return Err(ParseError {
                        line,
                        reason: format!("unknown sweep key `{other}`"),
                    })
                }
            }
        }
        if axes.is_empty() {
            return Err(ParseError {
                line: 0,
                reason: "sweep needs at least one non-empty axis".into(),
            });
        }
        if !axes.snr_db.is_empty() && base.topology.snr_db().is_none() {
            return Err(ParseError {
                line: 0,
                reason: "an snr_db axis needs a named topology".into(),
            });
        }
        let seeds = seeds.unwrap_or_else(|| (1..=DEFAULT_SEEDS).collect());
        Ok(SweepSpec { base, axes, seeds })
    }

    /// Grid points in canonical order: protocol, topology, pairs, SNR, rate.
    pub fn points(&self, name: &str) -> Result<Vec<SweepPoint>> {
        fn or_base<T: Clone>(axis: &[T], base: T) -> Vec<T> {
            if axis.is_empty() {
                vec![base]
            } else {
                axis.to_vec()
            }
        }
        let b = &self.base;
        let protocols = or_base(&self.axes.protocol, b.protocol);
        let topologies = or_base(&self.axes.topology, b.topology.kind_name().to_string());
        let pairs = or_base(&self.axes.num_pairs, b.num_pairs);
        let snrs: Vec<Option<f64>> = if self.axes.snr_db.is_empty() {
            vec![None]
        } else {
            self.axes.snr_db.iter().copied().map(Some).collect()
        };
        let rates = or_base(&self.axes.arrival_rate, b.arrival_rate);

        let mut out = Vec::new();
        for &protocol in &protocols {
            for kind in &topologies {
                for &num_pairs in &pairs {
                    for &snr in &snrs {
                        for &arrival_rate in &rates {
                            let mut c = b.clone();
                            c.protocol = protocol;
                            c.num_pairs = num_pairs;
                            c.arrival_rate = arrival_rate;
                            if kind != b.topology.kind_name() {
                                let s = b.topology.snr_db().unwrap_or(30.0);
                                c.topology = match kind.as_str() {
                                    "hidden_node" => TopologySpec::HiddenNode { snr_db: s },
                                    "exposed_node" => TopologySpec::ExposedNode { snr_db: s },
                                    _ => TopologySpec::FullyConnected { snr_db: s },
                                };
                            }
                            if let Some(s) = snr {
                                c.topology.set_snr_db(s);
                            }
                            let id = format!("{name}/{:03}", out.len());
                            let config = validate(c).map_err(|e| CliError::config(format!("point {id}: {e}")))?;
                            build_link_table(&config.topology, config.num_pairs)
                                .map_err(|e| CliError::config(format!("point {id}: {e}")))?;
                            out.push(SweepPoint { id, config });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs `points` x `seeds` on the rayon pool and streams rows to `out` in
/// point-then-seed order, whatever order the runs finish in.
pub fn run_grid<W: Write + Send>(points: &[SweepPoint], seeds: &[u64], out: W) -> Result<(Vec<ResultRow>, W)> {
    let jobs: Vec<(usize, &SweepPoint, u64)> = points
        .iter()
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .enumerate()
        .map(|(i, (p, s))| (i, p, s))
        .collect();
    let mut writer = ResultWriter::new(out)?;
    let mut rows = Vec::with_capacity(jobs.len());

    let (tx, rx) = mpsc::channel::<(usize, std::result::Result<MetricsReport, String>)>();
    std::thread::scope(|scope| -> Result<()> {
        let jobs_ref = &jobs;
        scope.spawn(move || {
            jobs_ref.par_iter().for_each_with(tx, |tx, &(i, point, seed)| {
                let cfg = validate(ScenarioConfig {
                    seed,
                    ..point.config.config().clone()
                })
                .expect("seed does not affect validity");
                let res = gsdma_core::run(&cfg).map_err(|e| e.to_string());
                // The receiver only disappears after an error; drop quietly then.
                let _ = tx.send((i, res));
            });
        });
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (i, res) in rx {
            pending.insert(i, res);
            while let Some(res) = pending.remove(&next) {
                let report = res.map_err(CliError::Config)?;
                let row = ResultRow::from_report(&jobs[next].1.id, &report);
                writer.write(&row)?;
                rows.push(row);
                next += 1;
            }
        }
        Ok(())
    })?;
    let out = writer.finish()?;
    Ok((rows, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_expand_inclusively() {
        assert_eq!(parse_range("5:60:5", 1).unwrap().len(), 12);
        assert_eq!(parse_range("1:4", 1).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        let r = parse_range("0.1:0.8:0.1", 1).unwrap();
        assert_eq!(r.len(), 8);
        assert!((r[7] - 0.8).abs() < 1e-12);
        assert!(parse_range("5:1", 1).is_err());
        assert!(parse_range("1:5:0", 1).is_err());
    }

    #[test]
    fn grid_is_cartesian_with_default_seeds() {
        let spec = SweepSpec::parse(
            "protocol = gsdma\n[sweep]\nnum_pairs = 1,2,3,4\nlambda = 0.2, 0.5, 0.8\n",
            None,
            &[],
        )
        .unwrap();
        assert_eq!(spec.seeds, (1..=10).collect::<Vec<_>>());
        let points = spec.points("fig4").unwrap();
        assert_eq!(points.len(), 12);
        assert_eq!(points[0].id, "fig4/000");
        assert_eq!((points[5].config.num_pairs, points[5].config.arrival_rate), (2, 0.8));
    }

    #[test]
    fn empty_or_unknown_axes_are_errors() {
        assert!(SweepSpec::parse("protocol = gsdma\n", None, &[]).is_err());
        assert!(SweepSpec::parse("[sweep]\nnum_pairs =\n", None, &[]).is_err());
        assert!(SweepSpec::parse("[sweep]\nburst = 1\n", None, &[]).is_err());
        assert!(SweepSpec::parse("[sweep]\nprotocol = aloha\n", None, &[]).is_err());
    }

    #[test]
    fn scenario_errors_keep_line_numbers() {
        let err = SweepSpec::parse("[sweep]\nnum_pairs = 1\n[general]\nbogus = 1\n", None, &[]).unwrap_err();
        assert_eq!(err.line, 4);
    }

    #[test]
    fn invalid_points_are_config_errors() {
        let spec = SweepSpec::parse("[sweep]\nnum_pairs = 0, 1\n", None, &[]).unwrap();
        assert!(matches!(spec.points("x"), Err(CliError::Config(_))));
    }

    #[test]
    fn topology_axis_keeps_snr() {
        let spec = SweepSpec::parse(
            "num_pairs = 2\n[topology]\nsnr_db = 12\n[sweep]\ntopology = fully_connected, hidden_node\n",
            None,
            &[],
        )
        .unwrap();
        let pts = spec.points("h").unwrap();
        assert_eq!(pts[1].config.topology, TopologySpec::HiddenNode { snr_db: 12.0 });
    }
}
