//! Line-oriented scenario files.
//!
//! ```text
//! # two saturated pairs behind a hidden terminal
//! protocol = gsdma
//!
//! [topology]
//! kind = hidden_node
//! snr_db = 30
//!
//! [traffic]
//! arrival_rate = 0.5
//! ```
//!
//! Sections are `general`, `topology`, `traffic`, `csma` and `error_model`.
//! Keys before the first header may name any section's key as long as the
//! name is unambiguous. `lambda` is accepted for `arrival_rate`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::channel::ErrorTable;
use crate::config::{
    validate, ArrivalUnit, CsmaParams, DelayReference, ErrorModelSpec, GrantFailurePolicy, Position, PriorityScheme,
    Protocol, ScenarioConfig, TopologySpec, ValidatedConfig, ValidationError,
};

pub const SECTIONS: [&str; 5] = ["general", "topology", "traffic", "csma", "error_model"];

const KEYS: &[(&str, &str)] = &[
    ("general", "protocol"),
    ("general", "num_pairs"),
    ("general", "max_pairs"),
    ("general", "slot_time_us"),
    ("general", "packet_len_slots"),
    ("general", "link_rate_mbps"),
    ("general", "sim_slots"),
    ("general", "warmup_slots"),
    ("general", "seed"),
    ("general", "decode_cap"),
    ("general", "grant_failure"),
    ("general", "delay_reference"),
    ("general", "batches"),
    ("topology", "kind"),
    ("topology", "snr_db"),
    ("topology", "positions"),
    ("topology", "tx_power_dbm"),
    ("topology", "freq_ghz"),
    ("topology", "noise_dbm"),
    ("topology", "range_snr_db"),
    ("traffic", "arrival_rate"),
    ("traffic", "arrival_unit"),
    ("traffic", "priority_scheme"),
    ("traffic", "quantization_levels"),
    ("traffic", "priorities"),
    ("traffic", "queue_cap"),
    ("csma", "sifs_slots"),
    ("csma", "difs_slots"),
    ("csma", "cw_min"),
    ("csma", "cw_max"),
    ("csma", "max_retries"),
    ("csma", "ack_slots"),
    ("error_model", "kind"),
    ("error_model", "p_min"),
    ("error_model", "p_max"),
    ("error_model", "snr_mid_db"),
    ("error_model", "snr_mid_step_db"),
    ("error_model", "slope_per_db"),
    ("error_model", "p_err"),
    ("error_model", "table"),
];

/// Parse failure. `line` is 1-based; 0 marks a command-line override.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn canonical_key(key: &str) -> &str {
    match key {
        "lambda" => "arrival_rate",
        other => other,
    }
}

fn resolve(section: Option<&str>, key: &str, line: usize) -> Result<(&'static str, &'static str), ParseError> {
    let key = canonical_key(key);
    let matches: Vec<&(&str, &str)> = KEYS
        .iter()
        .filter(|(s, k)| *k == key && section.is_none_or(|sec| sec == *s))
        .collect();
    match matches.as_slice() {
        [(s, k)] => Ok((s, k)),
        [] => Err(ParseError {
            line,
            reason: match section {
                Some(sec) => format!("unknown key `{key}` in section [{sec}]"),
                None => format!("unknown key `{key}`"),
            },
        }),
        many => Err(ParseError {
            line,
            reason: format!(
                "key `{key}` is ambiguous; qualify it with one of: {}",
                many.iter().map(|(s, _)| *s).collect::<Vec<_>>().join(", ")
            ),
        }),
    }
}

/// Untyped `section.key -> value` assignments, in the order they were made.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioSource {
    values: BTreeMap<(&'static str, &'static str), (String, usize)>,
}

impl ScenarioSource {
    /// Parses scenario file text.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut src = ScenarioSource::default();
        let mut section: Option<&'static str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ParseError {
                    line,
                    reason: format!("malformed section header `{content}`"),
                })?;
                let name = name.trim();
                section = Some(SECTIONS.iter().copied().find(|s| *s == name).ok_or_else(|| ParseError {
                    line,
                    reason: format!("unknown section [{name}]"),
                })?);
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ParseError {
                line,
                reason: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ParseError {
                    line,
                    reason: "missing key".into(),
                });
            }
            let slot = resolve(section, key, line)?;
            if let Some((_, first)) = src.values.get(&slot) {
                return Err(ParseError {
                    line,
                    reason: format!("`{}.{}` already set on line {first}", slot.0, slot.1),
                });
            }
            src.values.insert(slot, (value.to_string(), line));
        }
        Ok(src)
    }

    /// Applies `key=value` or `section.key=value`, replacing earlier values.
    pub fn set(&mut self, assignment: &str) -> Result<(), ParseError> {
        let (path, value) = assignment.split_once('=').ok_or_else(|| ParseError {
            line: 0,
            reason: format!("override `{assignment}` is not key=value"),
        })?;
        let path = path.trim();
        let (section, key) = match path.split_once('.') {
            Some((s, k)) => (Some(s.trim()), k.trim()),
            None => (None, path),
        };
        if let Some(s) = section {
            if !SECTIONS.contains(&s) {
                return Err(ParseError {
                    line: 0,
                    reason: format!("unknown section `{s}` in override `{assignment}`"),
                });
            }
        }
        let slot = resolve(section, key, 0)?;
        self.values.insert(slot, (value.trim().to_string(), 0));
        Ok(())
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .iter()
            .find(|((s, k), _)| *s == section && *k == key)
            .map(|(_, (v, _))| v.as_str())
    }

    /// Typed configuration with every unset key at its default. Error-model
    /// table paths resolve against `base_dir`; without one, tables are refused.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<ScenarioConfig, ParseError> {
        Builder { src: self }.build(base_dir)
    }
}

struct Builder<'a> {
    src: &'a ScenarioSource,
}

impl Builder<'_> {
    fn raw(&self, sec: &'static str, key: &'static str) -> Option<(&str, usize)> {
        self.src.values.get(&(sec, key)).map(|(v, l)| (v.as_str(), *l))
    }

    fn parsed<T: std::str::FromStr>(&self, sec: &'static str, key: &'static str) -> Result<Option<T>, ParseError> {
        match self.raw(sec, key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|_| ParseError {
                line,
                reason: format!("`{key}` has invalid value `{v}`"),
            }),
        }
    }

    fn float(&self, sec: &'static str, key: &'static str) -> Result<Option<f64>, ParseError> {
        let v: Option<f64> = self.parsed(sec, key)?;
        match v {
            Some(x) if !x.is_finite() => Err(ParseError {
                line: self.raw(sec, key).map_or(0, |r| r.1),
                reason: format!("`{key}` must be finite"),
            }),
            other => Ok(other),
        }
    }

    fn choice<T>(
        &self,
        sec: &'static str,
        key: &'static str,
        options: &[(&str, T)],
    ) -> Result<Option<T>, ParseError>
    where
        T: Copy,
    {
        let Some((v, line)) = self.raw(sec, key) else {
            return Ok(None);
        };
        options
            .iter()
            .find(|(name, _)| name.eq_ignore_ascii_case(v))
            .map(|(_, t)| Some(*t))
            .ok_or_else(|| ParseError {
                line,
                reason: format!(
                    "`{key}` must be one of {}, got `{v}`",
                    options.iter().map(|(n, _)| *n).collect::<Vec<_>>().join("|")
                ),
            })
    }

    fn unused(&self, sec: &'static str, keys: &[&'static str], why: &str) -> Result<(), ParseError> {
        for key in keys {
            if let Some((_, line)) = self.raw(sec, key) {
                return Err(ParseError {
                    line,
                    reason: format!("`{key}` does not apply to {why}"),
                });
            }
        }
        Ok(())
    }

    fn build(&self, base_dir: Option<&Path>) -> Result<ScenarioConfig, ParseError> {
        let mut c = ScenarioConfig::default();

        if let Some((v, line)) = self.raw("general", "protocol") {
            c.protocol = Protocol::parse(v).ok_or_else(|| ParseError {
                line,
                reason: format!("`protocol` must be gsdma or csmaca, got `{v}`"),
            })?;
        }
        macro_rules! take {
            ($field:expr, $sec:literal, $key:literal) => {
                if let Some(v) = self.parsed($sec, $key)? {
                    $field = v;
                }
            };
        }
        macro_rules! take_f {
            ($field:expr, $sec:literal, $key:literal) => {
                if let Some(v) = self.float($sec, $key)? {
                    $field = v;
                }
            };
        }
        take!(c.num_pairs, "general", "num_pairs");
        take!(c.max_pairs, "general", "max_pairs");
        take_f!(c.slot_time_us, "general", "slot_time_us");
        take!(c.packet_len_slots, "general", "packet_len_slots");
        take_f!(c.link_rate_mbps, "general", "link_rate_mbps");
        take!(c.sim_slots, "general", "sim_slots");
        take!(c.seed, "general", "seed");
        take!(c.decode_cap, "general", "decode_cap");
        take!(c.batches, "general", "batches");
        match self.raw("general", "warmup_slots") {
            Some(("auto", _)) | None => {}
            Some(_) => c.warmup_slots = self.parsed("general", "warmup_slots")?,
        }
        if let Some(v) = self.choice(
            "general",
            "grant_failure",
            &[
                ("idle", GrantFailurePolicy::IdleReservation),
                ("recontend", GrantFailurePolicy::Recontend),
            ],
        )? {
            c.grant_failure = v;
        }
        if let Some(v) = self.choice(
            "general",
            "delay_reference",
            &[
                ("head_of_line", DelayReference::HeadOfLine),
                ("arrival", DelayReference::Arrival),
            ],
        )? {
            c.delay_reference = v;
        }

        c.topology = self.topology()?;

        take_f!(c.arrival_rate, "traffic", "arrival_rate");
        if let Some(v) = self.choice(
            "traffic",
            "arrival_unit",
            &[
                ("slot", ArrivalUnit::Slot),
                ("packet", ArrivalUnit::Packet),
                ("network", ArrivalUnit::Network),
            ],
        )? {
            c.arrival_unit = v;
        }
        match self.raw("traffic", "queue_cap") {
            Some(("unbounded", _)) | None => {}
            Some(_) => c.queue_cap = self.parsed("traffic", "queue_cap")?,
        }
        c.priority_scheme = self.priority_scheme()?;

        let mut cs = CsmaParams::default();
        take!(cs.sifs_slots, "csma", "sifs_slots");
        take!(cs.difs_slots, "csma", "difs_slots");
        take!(cs.cw_min, "csma", "cw_min");
        take!(cs.cw_max, "csma", "cw_max");
        take!(cs.max_retries, "csma", "max_retries");
        take!(cs.ack_slots, "csma", "ack_slots");
        c.csma = cs;

        c.error_model = self.error_model(base_dir)?;
        Ok(c)
    }

    fn topology(&self) -> Result<TopologySpec, ParseError> {
        #[derive(Clone, Copy)]
        enum Kind {
            Full,
            Hidden,
            Exposed,
            Explicit,
        }
        let kind = self
            .choice(
                "topology",
                "kind",
                &[
                    ("fully_connected", Kind::Full),
                    ("hidden_node", Kind::Hidden),
                    ("exposed_node", Kind::Exposed),
                    ("explicit", Kind::Explicit),
                ],
            )?
            .unwrap_or(Kind::Full);
        let geometric = ["positions", "tx_power_dbm", "freq_ghz", "noise_dbm", "range_snr_db"];
        let snr = || -> Result<f64, ParseError> { Ok(self.float("topology", "snr_db")?.unwrap_or(30.0)) };
        Ok(match kind {
            Kind::Full => {
                self.unused("topology", &geometric, "named topologies")?;
                TopologySpec::FullyConnected { snr_db: snr()? }
            }
            Kind::Hidden => {
                self.unused("topology", &geometric, "named topologies")?;
                TopologySpec::HiddenNode { snr_db: snr()? }
            }
            Kind::Exposed => {
                self.unused("topology", &geometric, "named topologies")?;
                TopologySpec::ExposedNode { snr_db: snr()? }
            }
            Kind::Explicit => {
                self.unused("topology", &["snr_db"], "explicit topologies")?;
                let positions = match self.raw("topology", "positions") {
                    Some((v, line)) => parse_positions(v).map_err(|reason| ParseError { line, reason })?,
                    None => {
                        return Err(ParseError {
                            line: 0,
                            reason: "explicit topology needs `positions`".into(),
                        })
                    }
                };
                TopologySpec::Explicit {
                    positions,
                    tx_power_dbm: self.float("topology", "tx_power_dbm")?.unwrap_or(20.0),
                    freq_ghz: self.float("topology", "freq_ghz")?.unwrap_or(2.4),
                    noise_dbm: self.float("topology", "noise_dbm")?.unwrap_or(-90.0),
                    range_snr_db: self.float("topology", "range_snr_db")?.unwrap_or(5.0),
                }
            }
        })
    }

    fn priority_scheme(&self) -> Result<PriorityScheme, ParseError> {
        #[derive(Clone, Copy)]
        enum Kind {
            Queue,
            Static,
        }
        let kind = self.choice(
            "traffic",
            "priority_scheme",
            &[("queue_length", Kind::Queue), ("static_unique", Kind::Static)],
        )?;
        let kind = kind.unwrap_or(if self.raw("traffic", "priorities").is_some() {
            Kind::Static
        } else {
            Kind::Queue
        });
        Ok(match kind {
            Kind::Queue => {
                self.unused("traffic", &["priorities"], "the queue_length scheme")?;
                PriorityScheme::QueueLength {
                    quantization_levels: self.parsed("traffic", "quantization_levels")?.unwrap_or(8),
                }
            }
            Kind::Static => {
                self.unused("traffic", &["quantization_levels"], "the static_unique scheme")?;
                let priorities = match self.raw("traffic", "priorities") {
                    None => Vec::new(),
                    Some((v, line)) => parse_list(v).map_err(|reason| ParseError { line, reason })?,
                };
                PriorityScheme::StaticUnique { priorities }
            }
        })
    }

    fn error_model(&self, base_dir: Option<&Path>) -> Result<ErrorModelSpec, ParseError> {
        #[derive(Clone, Copy)]
        enum Kind {
            Logistic,
            Table,
            Fixed,
        }
        let kind = self
            .choice(
                "error_model",
                "kind",
                &[("logistic", Kind::Logistic), ("table", Kind::Table), ("fixed", Kind::Fixed)],
            )?
            .unwrap_or(Kind::Logistic);
        let logistic_keys = ["p_min", "p_max", "snr_mid_db", "snr_mid_step_db", "slope_per_db"];
        Ok(match kind {
            Kind::Logistic => {
                self.unused("error_model", &["p_err", "table"], "the logistic model")?;
                let ErrorModelSpec::Logistic {
                    mut p_min,
                    mut p_max,
                    mut snr_mid_db,
                    mut snr_mid_step_db,
                    mut slope_per_db,
                } = ErrorModelSpec::default_logistic()
                else {
                    unreachable!()
                };
                take_float(self, "p_min", &mut p_min)?;
                take_float(self, "p_max", &mut p_max)?;
                take_float(self, "snr_mid_db", &mut snr_mid_db)?;
                take_float(self, "snr_mid_step_db", &mut snr_mid_step_db)?;
                take_float(self, "slope_per_db", &mut slope_per_db)?;
                ErrorModelSpec::Logistic {
                    p_min,
                    p_max,
                    snr_mid_db,
                    snr_mid_step_db,
                    slope_per_db,
                }
            }
            Kind::Fixed => {
                self.unused("error_model", &logistic_keys, "the fixed model")?;
                self.unused("error_model", &["table"], "the fixed model")?;
                ErrorModelSpec::Fixed {
                    p_err: self.float("error_model", "p_err")?.unwrap_or(0.0),
                }
            }
            Kind::Table => {
                self.unused("error_model", &logistic_keys, "the table model")?;
                self.unused("error_model", &["p_err"], "the table model")?;
                let (raw, line) = self.raw("error_model", "table").ok_or_else(|| ParseError {
                    line: 0,
                    reason: "table model needs `table = <csv path>`".into(),
                })?;
                let base = base_dir.ok_or_else(|| ParseError {
                    line,
                    reason: "table files can only be loaded from a scenario on disk".into(),
                })?;
                let path = PathBuf::from(raw);
                let full = if path.is_absolute() { path.clone() } else { base.join(&path) };
                let text = std::fs::read_to_string(&full).map_err(|e| ParseError {
                    line,
                    reason: format!("cannot read {}: {e}", full.display()),
                })?;
                let table = ErrorTable::parse_csv(&text).map_err(|e| ParseError {
                    line,
                    reason: format!("{}: {e}", full.display()),
                })?;
                ErrorModelSpec::Table { path, table }
            }
        })
    }
}

fn take_float(b: &Builder<'_>, key: &'static str, into: &mut f64) -> Result<(), ParseError> {
    if let Some(v) = b.float("error_model", key)? {
        *into = v;
    }
    Ok(())
}

fn parse_list(v: &str) -> Result<Vec<u32>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("`{s}` is not a non-negative integer")))
        .collect()
}

fn parse_positions(v: &str) -> Result<Vec<Position>, String> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|p| {
            let (x, y) = p.split_once(',').ok_or_else(|| format!("position `{p}` is not `x,y`"))?;
            let coord = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("coordinate `{}` is not a number", s.trim()))
            };
            Ok(Position { x: coord(x)?, y: coord(y)? })
        })
        .collect()
}

/// Parses scenario text and validates it.
pub fn parse_scenario(text: &str, base_dir: Option<&Path>) -> Result<ValidatedConfig, ScenarioError> {
    let src = ScenarioSource::parse(text)?;
    Ok(validate(src.build(base_dir)?)?)
}

/// Reads, parses and validates a scenario file, applying `overrides`
/// (`key=value` or `section.key=value`) on top of the file.
pub fn load_scenario_with(path: &Path, overrides: &[String]) -> Result<ValidatedConfig, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut src = ScenarioSource::parse(&text)?;
    for o in overrides {
        src.set(o)?;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(validate(src.build(Some(base))?)?)
}

pub fn load_scenario(path: &Path) -> Result<ValidatedConfig, ScenarioError> {
    load_scenario_with(path, &[])
}

/// Writes every key explicitly, so the output reparses to an equal config.
pub fn serialize(c: &ScenarioConfig) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "[general]");
    let _ = writeln!(w, "protocol = {}", c.protocol);
    let _ = writeln!(w, "num_pairs = {}", c.num_pairs);
    let _ = writeln!(w, "max_pairs = {}", c.max_pairs);
    let _ = writeln!(w, "slot_time_us = {}", c.slot_time_us);
    let _ = writeln!(w, "packet_len_slots = {}", c.packet_len_slots);
    let _ = writeln!(w, "link_rate_mbps = {}", c.link_rate_mbps);
    let _ = writeln!(w, "sim_slots = {}", c.sim_slots);
    match c.warmup_slots {
        Some(v) => writeln!(w, "warmup_slots = {v}"),
        None => writeln!(w, "warmup_slots = auto"),
    }
    .ok();
    let _ = writeln!(w, "seed = {}", c.seed);
    let _ = writeln!(w, "decode_cap = {}", c.decode_cap);
    let _ = writeln!(w, "grant_failure = {}", c.grant_failure.as_str());
    let _ = writeln!(w, "delay_reference = {}", c.delay_reference.as_str());
    let _ = writeln!(w, "batches = {}", c.batches);

    let _ = writeln!(w, "\n[topology]");
    let _ = writeln!(w, "kind = {}", c.topology.kind_name());
    match &c.topology {
        TopologySpec::Explicit {
            positions,
            tx_power_dbm,
            freq_ghz,
            noise_dbm,
            range_snr_db,
        } => {
            let pos: Vec<String> = positions.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
            let _ = writeln!(w, "positions = {}", pos.join("; "));
            let _ = writeln!(w, "tx_power_dbm = {tx_power_dbm}");
            let _ = writeln!(w, "freq_ghz = {freq_ghz}");
            let _ = writeln!(w, "noise_dbm = {noise_dbm}");
            let _ = writeln!(w, "range_snr_db = {range_snr_db}");
        }
        other => {
            let _ = writeln!(w, "snr_db = {}", other.snr_db().unwrap_or_default());
        }
    }

    let _ = writeln!(w, "\n[traffic]");
    let _ = writeln!(w, "arrival_rate = {}", c.arrival_rate);
    let _ = writeln!(w, "arrival_unit = {}", c.arrival_unit.as_str());
    match c.queue_cap {
        Some(v) => writeln!(w, "queue_cap = {v}"),
        None => writeln!(w, "queue_cap = unbounded"),
    }
    .ok();
    match &c.priority_scheme {
        PriorityScheme::QueueLength {
            quantization_levels,
        } => {
            let _ = writeln!(w, "priority_scheme = queue_length");
            let _ = writeln!(w, "quantization_levels = {quantization_levels}");
        }
        PriorityScheme::StaticUnique { priorities } => {
            let _ = writeln!(w, "priority_scheme = static_unique");
            if !priorities.is_empty() {
                let list: Vec<String> = priorities.iter().map(u32::to_string).collect();
                let _ = writeln!(w, "priorities = {}", list.join(","));
            }
        }
    }

    let cs = &c.csma;
    let _ = writeln!(w, "\n[csma]");
    let _ = writeln!(w, "sifs_slots = {}", cs.sifs_slots);
    let _ = writeln!(w, "difs_slots = {}", cs.difs_slots);
    let _ = writeln!(w, "cw_min = {}", cs.cw_min);
    let _ = writeln!(w, "cw_max = {}", cs.cw_max);
    let _ = writeln!(w, "max_retries = {}", cs.max_retries);
    let _ = writeln!(w, "ack_slots = {}", cs.ack_slots);

    let _ = writeln!(w, "\n[error_model]");
    let _ = writeln!(w, "kind = {}", c.error_model.kind_name());
    match &c.error_model {
        ErrorModelSpec::Logistic {
            p_min,
            p_max,
            snr_mid_db,
            snr_mid_step_db,
            slope_per_db,
        } => {
            let _ = writeln!(w, "p_min = {p_min}");
            let _ = writeln!(w, "p_max = {p_max}");
            let _ = writeln!(w, "snr_mid_db = {snr_mid_db}");
            let _ = writeln!(w, "snr_mid_step_db = {snr_mid_step_db}");
            let _ = writeln!(w, "slope_per_db = {slope_per_db}");
        }
        ErrorModelSpec::Table { path, .. } => {
            let _ = writeln!(w, "table = {}", path.display());
        }
        ErrorModelSpec::Fixed { p_err } => {
            let _ = writeln!(w, "p_err = {p_err}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse_scenario("protocol = gsdma\n", None).unwrap();
        assert_eq!(cfg.protocol, Protocol::GsdMa);
        assert_eq!(cfg.slot_time_us, 20.0);
        assert_eq!(cfg.packet_len_slots, 50);
        assert_eq!(cfg.csma.sifs_slots, 8);
        assert_eq!(cfg.csma.difs_slots, 12);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ScenarioSource::parse("protocol = gsdma\n[traffic]\nburstiness = 3\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.reason.contains("burstiness"), "{}", err.reason);
    }

    #[test]
    fn operating_point_keys() {
        let cfg = parse_scenario("snr_db = 30\nlambda = 0.5\n", None).unwrap();
        assert_eq!(cfg.topology.snr_db(), Some(30.0));
        assert_eq!(cfg.arrival_rate, 0.5);
    }

    #[test]
    fn ambiguous_bare_key_needs_section() {
        let err = ScenarioSource::parse("kind = fixed\n").unwrap_err();
        assert!(err.reason.contains("ambiguous"));
        let src = ScenarioSource::parse("[error_model]\nkind = fixed\np_err = 0\n").unwrap();
        assert_eq!(src.build(None).unwrap().error_model, ErrorModelSpec::Fixed { p_err: 0.0 });
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut src = ScenarioSource::parse("[general]\nnum_pairs = 2\n").unwrap();
        src.set("num_pairs=4").unwrap();
        src.set("topology.snr_db = 12.5").unwrap();
        let cfg = src.build(None).unwrap();
        assert_eq!(cfg.num_pairs, 4);
        assert_eq!(cfg.topology.snr_db(), Some(12.5));
        assert!(src.set("bogus.key=1").is_err());
        assert!(src.set("num_pairs").is_err());
    }

    #[test]
    fn malformed_lines() {
        for text in ["[general\n", "[nope]\n", "just words\n", " = 3\n", "num_pairs = 1\nnum_pairs = 2\n"] {
            assert!(ScenarioSource::parse(text).is_err(), "{text:?}");
        }
        let src = ScenarioSource::parse("num_pairs = many\n").unwrap();
        assert_eq!(src.build(None).unwrap_err().line, 1);
    }

    #[test]
    fn validation_errors_surface() {
        assert!(matches!(
            parse_scenario("num_pairs = 0\n", None),
            Err(ScenarioError::Invalid(_))
        ));
    }

    #[test]
    fn explicit_topology_roundtrip() {
        let text = "num_pairs = 1\n[topology]\nkind = explicit\npositions = 0,0; 100,0\nfreq_ghz = 5\n";
        let cfg = parse_scenario(text, None).unwrap();
        let again = parse_scenario(&serialize(&cfg), None).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn static_priorities_parse() {
        let cfg = parse_scenario("num_pairs = 3\npriorities = 3,1,2\n", None).unwrap();
        assert_eq!(
            cfg.priority_scheme,
            PriorityScheme::StaticUnique {
                priorities: vec![3, 1, 2]
            }
        );
    }

    #[test]
    fn table_requires_base_dir() {
        let err = ScenarioSource::parse("[error_model]\nkind = table\ntable = e.csv\n")
            .unwrap()
            .build(None)
            .unwrap_err();
        assert!(err.reason.contains("scenario on disk"));
    }
}
