//! `results.csv`: one row per simulated (point, seed).

use std::io::{Read, Write};

use gsdma_core::MetricsReport;

use crate::error::{CliError, Result};

pub const COLUMNS: [&str; 15] = [
    "scenario_id",
    "protocol",
    "num_pairs",
    "topology",
    "snr_db",
    "lambda",
    "seed",
    "sim_slots",
    "n",
    "k",
    "m",
    "efficiency",
    "packets_served",
    "mean_access_delay_us",
    "delay_ci95_us",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario_id: String,
    pub protocol: String,
    pub num_pairs: usize,
    pub topology: String,
    pub snr_db: Option<f64>,
    pub lambda: f64,
    pub seed: u64,
    pub sim_slots: u64,
    pub n: u64,
    pub k: u64,
    pub m: u64,
    pub efficiency: Option<f64>,
    pub packets_served: u64,
    pub mean_access_delay_us: Option<f64>,
    pub delay_ci95_us: Option<f64>,
}

impl ResultRow {
    pub fn from_report(scenario_id: &str, r: &MetricsReport) -> Self {
        let a = &r.aggregate;
        ResultRow {
            scenario_id: scenario_id.to_string(),
            protocol: r.protocol.as_str().to_string(),
            num_pairs: r.num_pairs,
            topology: r.topology.to_string(),
            snr_db: r.snr_db,
            lambda: r.arrival_rate,
            seed: r.seed,
            sim_slots: r.sim_slots,
            n: a.counts.n,
            k: a.counts.k,
            m: a.counts.m,
            efficiency: a.efficiency,
            packets_served: a.packets_served,
            mean_access_delay_us: a.mean_access_delay_us,
            delay_ci95_us: a.delay_ci95_us,
        }
    }

    /// Schema-level sanity: efficiency in [0, 1], delays non-negative.
    pub fn check(&self) -> std::result::Result<(), String> {
        if let Some(e) = self.efficiency {
            if !(0.0..=1.0).contains(&e) {
                return Err(format!("{}: efficiency {e} outside [0, 1]", self.scenario_id));
            }
        }
        for (name, v) in [
            ("mean_access_delay_us", self.mean_access_delay_us),
            ("delay_ci95_us", self.delay_ci95_us),
        ] {
            if let Some(v) = v {
                if v.is_nan() || v < 0.0 {
                    return Err(format!("{}: {name} {v} is negative", self.scenario_id));
                }
            }
        }
        Ok(())
    }

    fn fields(&self) -> [String; 15] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.scenario_id.clone(),
            self.protocol.clone(),
            self.num_pairs.to_string(),
            self.topology.clone(),
            opt(self.snr_db),
            self.lambda.to_string(),
            self.seed.to_string(),
            self.sim_slots.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.m.to_string(),
            opt(self.efficiency),
            self.packets_served.to_string(),
            opt(self.mean_access_delay_us),
            opt(self.delay_ci95_us),
        ]
    }
}

/// Streams rows, flushing after each so interrupted sweeps keep what finished.
pub struct ResultWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> ResultWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(COLUMNS).map_err(csv_io)?;
        Ok(ResultWriter { inner })
    }

    pub fn write(&mut self, row: &ResultRow) -> Result<()> {
        row.check().map_err(CliError::Config)?;
        self.inner.write_record(row.fields()).map_err(csv_io)?;
        self.inner.flush().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush().map_err(|e| CliError::Io(e.to_string()))?;
        self.inner.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

fn csv_io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = ResultWriter::new(Vec::new())?;
    for r in rows {
        w.write(r)?;
    }
    Ok(String::from_utf8(w.finish()?).expect("csv output is utf-8"))
}

/// A parsed CSV with named columns, used by the plotter.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

pub fn read_table<R: Read>(input: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::config(format!("unreadable CSV header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::config(format!("malformed CSV: {e}")))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(Table { headers, rows })
}

/// Parses a `results.csv` body back into typed rows.
pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let table = read_table(input)?;
    if table.headers != COLUMNS {
        return Err(CliError::config(format!(
            "results header must be `{}`",
            COLUMNS.join(",")
        )));
    }
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| parse_row(r).map_err(|e| CliError::config(format!("row {}: {e}", i + 1))))
        .collect()
}

fn parse_row(f: &[String]) -> std::result::Result<ResultRow, String> {
    fn num<T: std::str::FromStr>(s: &str, name: &str) -> std::result::Result<T, String> {
        s.parse().map_err(|_| format!("{name}: `{s}` is not a number"))
    }
    fn opt(s: &str, name: &str) -> std::result::Result<Option<f64>, String> {
        if s.is_empty() {
            return Ok(None);
        }
        let v: f64 = num(s, name)?;
        if v.is_nan() {
            return Err(format!("{name} is NaN"));
        }
        Ok(Some(v))
    }
    let row = ResultRow {
        scenario_id: f[0].clone(),
        protocol: f[1].clone(),
        num_pairs: num(&f[2], "num_pairs")?,
        topology: f[3].clone(),
        snr_db: opt(&f[4], "snr_db")?,
        lambda: num(&f[5], "lambda")?,
        seed: num(&f[6], "seed")?,
        sim_slots: num(&f[7], "sim_slots")?,
        n: num(&f[8], "n")?,
        k: num(&f[9], "k")?,
        m: num(&f[10], "m")?,
        efficiency: opt(&f[11], "efficiency")?,
        packets_served: num(&f[12], "packets_served")?,
        mean_access_delay_us: opt(&f[13], "mean_access_delay_us")?,
        delay_ci95_us: opt(&f[14], "delay_ci95_us")?,
    };
    row.check()?;
    Ok(row)
}
