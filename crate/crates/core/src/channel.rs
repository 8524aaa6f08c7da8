//! Link connectivity and the request/grant decode model.
//!
//! Superposed control messages are resolved at the receiver; a listener that
//! hears `k` simultaneous messages decodes each one independently with
//! probability `1 - p_err(snr, k)`, as long as `k` does not exceed the decode
//! cap.

use std::fmt;

use rand::Rng;

use crate::config::{ErrorModelSpec, Position, TopologySpec};
use crate::node::{NodeId, PairId};

const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
const MIN_DISTANCE_M: f64 = 0.01;

/// Free-space path loss in dB for a distance in metres and a carrier in Hz.
pub fn fspl_db(distance_m: f64, freq_hz: f64) -> f64 {
    let d = distance_m.max(MIN_DISTANCE_M);
    20.0 * (4.0 * std::f64::consts::PI * d * freq_hz / SPEED_OF_LIGHT_M_S).log10()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("{pair} is out of range of its own receiver (snr {snr_db:.2} dB < {range_snr_db:.2} dB)")]
    PairOutOfRange {
        pair: PairId,
        snr_db: f64,
        range_snr_db: f64,
    },
    #[error("expected {expected} node positions, got {got}")]
    PositionCount { expected: usize, got: usize },
}

/// Symmetric in-range matrix plus per-link SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTable {
    nodes: usize,
    in_range: Vec<bool>,
    snr_db: Vec<f64>,
}

impl LinkTable {
    fn empty(nodes: usize) -> Self {
        LinkTable {
            nodes,
            in_range: vec![false; nodes * nodes],
            snr_db: vec![f64::NEG_INFINITY; nodes * nodes],
        }
    }

    fn connect(&mut self, a: NodeId, b: NodeId, snr_db: f64) {
        if a == b {
            return;
        }
        for (i, j) in [(a.0, b.0), (b.0, a.0)] {
            self.in_range[i * self.nodes + j] = true;
            self.snr_db[i * self.nodes + j] = snr_db;
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn pair_count(&self) -> usize {
        self.nodes / 2
    }

    pub fn in_range(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.in_range[a.0 * self.nodes + b.0]
    }

    /// SNR of the link, `None` when out of range.
    pub fn snr_db(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.in_range(a, b).then(|| self.snr_db[a.0 * self.nodes + b.0])
    }

    /// Whether the two pairs can interfere: some radio of one hears some
    /// radio of the other.
    pub fn pairs_interact(&self, a: PairId, b: PairId) -> bool {
        if a == b {
            return false;
        }
        [a.transmitter(), a.receiver()].iter().any(|&x| {
            [b.transmitter(), b.receiver()]
                .iter()
                .any(|&y| self.in_range(x, y))
        })
    }
}

/// Builds the link table realizing a topology.
pub fn build_link_table(topology: &TopologySpec, num_pairs: usize) -> Result<LinkTable, TopologyError> {
    let nodes = 2 * num_pairs;
    let pairs = || (0..num_pairs).map(PairId);
    let mut table = LinkTable::empty(nodes);
    match *topology {
        TopologySpec::FullyConnected { snr_db } => {
            for a in 0..nodes {
                for b in a + 1..nodes {
                    table.connect(NodeId(a), NodeId(b), snr_db);
                }
            }
        }
        TopologySpec::HiddenNode { snr_db } => {
            let shared_rx = PairId(0).receiver();
            for p in pairs() {
                table.connect(p.transmitter(), p.receiver(), snr_db);
                table.connect(p.transmitter(), shared_rx, snr_db);
            }
        }
        TopologySpec::ExposedNode { snr_db } => {
            for p in pairs() {
                table.connect(p.transmitter(), p.receiver(), snr_db);
                for q in pairs().filter(|q| q.0 > p.0) {
                    table.connect(p.transmitter(), q.transmitter(), snr_db);
                }
            }
        }
        TopologySpec::Explicit {
            ref positions,
            tx_power_dbm,
            freq_ghz,
            noise_dbm,
            range_snr_db,
        } => {
            if positions.len() != nodes {
                return Err(TopologyError::PositionCount {
                    expected: nodes,
                    got: positions.len(),
                });
            }
            let snr = |a: &Position, b: &Position| {
                tx_power_dbm - fspl_db(a.distance(b), freq_ghz * 1e9) - noise_dbm
            };
            for p in pairs() {
                let s = snr(&positions[p.transmitter().0], &positions[p.receiver().0]);
                if s < range_snr_db {
                    return Err(TopologyError::PairOutOfRange {
                        pair: p,
                        snr_db: s,
                        range_snr_db,
                    });
                }
            }
            for a in 0..nodes {
                for b in a + 1..nodes {
                    let s = snr(&positions[a], &positions[b]);
                    if s >= range_snr_db {
                        table.connect(NodeId(a), NodeId(b), s);
                    }
                }
            }
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("error table line {line}: {reason}")]
pub struct TableError {
    pub line: usize,
    pub reason: String,
}

/// Rectangular `(snr_db, k) -> p_err` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    snr_axis: Vec<f64>,
    k_axis: Vec<f64>,
    /// Row-major by k: `values[ki * snr_axis.len() + si]`.
    values: Vec<f64>,
}

impl ErrorTable {
    /// Parses CSV with header `snr_db,k,p_err`. Every `(snr_db, k)` grid
    /// combination must be present exactly once.
    pub fn parse_csv(text: &str) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| TableError {
            line: 1,
            reason: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != ["snr_db", "k", "p_err"] {
            return Err(TableError {
                line: 1,
                reason: format!("header must be `snr_db,k,p_err`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| TableError {
                line: e.position().map_or(0, |p| p.line() as usize),
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize, name: &str| -> Result<f64, TableError> {
                let raw = record.get(i).unwrap_or("");
                let v: f64 = raw.parse().map_err(|_| TableError {
                    line,
                    reason: format!("{name} `{raw}` is not a number"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(TableError {
                        line,
                        reason: format!("{name} must be finite"),
                    })
                }
            };
            let (snr, k, p) = (field(0, "snr_db")?, field(1, "k")?, field(2, "p_err")?);
            if !(0.0..=1.0).contains(&p) {
                return Err(TableError {
                    line,
                    reason: format!("p_err {p} is not a probability"),
                });
            }
            if k < 1.0 {
                return Err(TableError {
                    line,
                    reason: format!("k {k} must be at least 1"),
                });
            }
            rows.push((line, snr, k, p));
        }
        if rows.is_empty() {
            return Err(TableError {
                line: 1,
                reason: "table has no data rows".into(),
            });
        }
        let axis = |sel: fn(&(usize, f64, f64, f64)) -> f64| {
            let mut v: Vec<f64> = rows.iter().map(sel).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let snr_axis = axis(|r| r.1);
        let k_axis = axis(|r| r.2);
        let mut values = vec![f64::NAN; snr_axis.len() * k_axis.len()];
        for &(line, snr, k, p) in &rows {
            let si = snr_axis.partition_point(|&x| x < snr);
            let ki = k_axis.partition_point(|&x| x < k);
            let slot = &mut values[ki * snr_axis.len() + si];
            if !slot.is_nan() {
                return Err(TableError {
                    line,
                    reason: format!("duplicate grid point snr_db={snr}, k={k}"),
                });
            }
            *slot = p;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(TableError {
                line: rows.last().map_or(1, |r| r.0),
                reason: format!(
                    "grid is incomplete: expected {} x {} points, got {}",
                    snr_axis.len(),
                    k_axis.len(),
                    rows.len()
                ),
            });
        }
        Ok(ErrorTable {
            snr_axis,
            k_axis,
            values,
        })
    }

    /// Renders the grid back as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr_db,k,p_err\n");
        for (ki, k) in self.k_axis.iter().enumerate() {
            for (si, snr) in self.snr_axis.iter().enumerate() {
                out.push_str(&format!("{snr},{k},{}\n", self.values[ki * self.snr_axis.len() + si]));
            }
        }
        out
    }

    fn at(&self, ki: usize, si: usize) -> f64 {
        self.values[ki * self.snr_axis.len() + si]
    }

    /// Checks that p_err never rises with SNR and never falls with k.
    pub fn check_monotone(&self) -> Result<(), String> {
        for ki in 0..self.k_axis.len() {
            for si in 1..self.snr_axis.len() {
                if self.at(ki, si) > self.at(ki, si - 1) {
                    return Err(format!(
                        "p_err rises with snr at k={} between {} and {} dB",
                        self.k_axis[ki],
                        self.snr_axis[si - 1],
                        self.snr_axis[si]
                    ));
                }
            }
        }
        for si in 0..self.snr_axis.len() {
            for ki in 1..self.k_axis.len() {
                if self.at(ki, si) < self.at(ki - 1, si) {
                    return Err(format!(
                        "p_err falls with k at {} dB between k={} and k={}",
                        self.snr_axis[si],
                        self.k_axis[ki - 1],
                        self.k_axis[ki]
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear interpolation, clamped to the grid edges.
    pub fn lookup(&self, snr_db: f64, k: f64) -> f64 {
        let (s0, s1, ts) = bracket(&self.snr_axis, snr_db);
        let (k0, k1, tk) = bracket(&self.k_axis, k);
        let lo = self.at(k0, s0) * (1.0 - ts) + self.at(k0, s1) * ts;
        let hi = self.at(k1, s0) * (1.0 - ts) + self.at(k1, s1) * ts;
        lo * (1.0 - tk) + hi * tk
    }
}

fn bracket(axis: &[f64], x: f64) -> (usize, usize, f64) {
    let last = axis.len() - 1;
    if x <= axis[0] {
        return (0, 0, 0.0);
    }
    if x >= axis[last] {
        return (last, last, 0.0);
    }
    let hi = axis.partition_point(|&a| a <= x);
    let lo = hi - 1;
    (lo, hi, (x - axis[lo]) / (axis[hi] - axis[lo]))
}

/// Evaluates `p_err(snr, k)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorModel {
    Logistic {
        p_min: f64,
        p_max: f64,
        snr_mid_db: f64,
        snr_mid_step_db: f64,
        slope_per_db: f64,
    },
    Table(ErrorTable),
    Fixed(f64),
}

impl ErrorModel {
    pub fn from_spec(spec: &ErrorModelSpec) -> Self {
        match spec {
            &ErrorModelSpec::Logistic {
                p_min,
                p_max,
                snr_mid_db,
                snr_mid_step_db,
                slope_per_db,
            } => ErrorModel::Logistic {
                p_min,
                p_max,
                snr_mid_db,
                snr_mid_step_db,
                slope_per_db,
            },
            ErrorModelSpec::Table { table, .. } => ErrorModel::Table(table.clone()),
            &ErrorModelSpec::Fixed { p_err } => ErrorModel::Fixed(p_err),
        }
    }

    /// Lower and upper bound of the model's output.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            ErrorModel::Logistic { p_min, p_max, .. } => (*p_min, *p_max),
            ErrorModel::Table(t) => (t.min_value(), t.max_value()),
            ErrorModel::Fixed(p) => (*p, *p),
        }
    }

    /// Decode-failure probability of one message at `snr_db` when `k`
    /// messages are superposed at the listener.
    pub fn p_err(&self, snr_db: f64, k: usize) -> f64 {
        match *self {
            ErrorModel::Logistic {
                p_min,
                p_max,
                snr_mid_db,
                snr_mid_step_db,
                slope_per_db,
            } => {
                let mid = snr_mid_db + snr_mid_step_db * (k.max(1) - 1) as f64;
                let s = 1.0 / (1.0 + (-slope_per_db * (mid - snr_db)).exp());
                (p_min + (p_max - p_min) * s).clamp(p_min, p_max)
            }
            ErrorModel::Table(ref t) => t.lookup(snr_db, k as f64),
            ErrorModel::Fixed(p) => p,
        }
    }
}

/// Decode context shared by every listener in a slot.
#[derive(Debug, Clone, Copy)]
pub struct Channel<'a> {
    pub links: &'a LinkTable,
    pub errors: &'a ErrorModel,
    pub decode_cap: usize,
}

/// Per-listener decode statistics for one slot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeStats {
    /// Messages that reached the listener.
    pub attempted: u32,
    /// Messages lost to decode failure or the decode cap.
    pub failed: u32,
}

impl fmt::Display for DecodeStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} decoded", self.attempted - self.failed, self.attempted)
    }
}

impl Channel<'_> {
    /// Messages `listener` decodes from simultaneous `transmissions`.
    ///
    /// Out-of-range senders are neither decoded nor counted toward `k`. More
    /// than `decode_cap` in-range messages decode to nothing.
    pub fn decode_outcomes<M: Clone, R: Rng + ?Sized>(
        &self,
        transmissions: &[(NodeId, M)],
        listener: NodeId,
        rng: &mut R,
    ) -> (Vec<M>, DecodeStats) {
        let heard: Vec<(f64, &M)> = transmissions
            .iter()
            .filter_map(|(src, msg)| self.links.snr_db(*src, listener).map(|snr| (snr, msg)))
            .collect();
        let k = heard.len();
        let mut stats = DecodeStats {
            attempted: k as u32,
            failed: 0,
        };
        if k > self.decode_cap {
            stats.failed = k as u32;
            return (Vec::new(), stats);
        }
        let mut decoded = Vec::with_capacity(k);
        for (snr, msg) in heard {
            let p = self.errors.p_err(snr, k);
            // p == 0 short-circuits so error-free runs consume no randomness.
            if p <= 0.0 || !rng.random_bool(p.min(1.0)) {
                decoded.push(msg.clone());
            } else {
                stats.failed += 1;
            }
        }
        (decoded, stats)
    }
}
