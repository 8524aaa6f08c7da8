//! Scenario description and validation.
//!
//! A [`ScenarioConfig`] fully describes one simulation run. It is plain data;
//! [`validate`] checks every invariant, resolves derived defaults and returns
//! an immutable [`ValidatedConfig`] that the engine consumes.

use std::fmt;
use std::ops::Deref;
use std::path::PathBuf;

use crate::channel::ErrorTable;

/// Medium-access scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    GsdMa,
    CsmaCa,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::GsdMa => "gsdma",
            Protocol::CsmaCa => "csmaca",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "gsdma" => Some(Protocol::GsdMa),
            "csmaca" | "csma" | "dcf" => Some(Protocol::CsmaCa),
            _ => None,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How request priorities are assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorityScheme {
    /// Priority is the local queue length clamped to `quantization_levels - 1`.
    /// Larger values win.
    QueueLength { quantization_levels: u32 },
    /// Fixed, distinct priority per pair. `priorities[i]` belongs to pair `i`;
    /// 1 is the highest. An empty list means "pair index + 1".
    StaticUnique { priorities: Vec<u32> },
}

impl Default for PriorityScheme {
    fn default() -> Self {
        PriorityScheme::QueueLength {
            quantization_levels: 8,
        }
    }
}

/// 2-D node position in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn distance(&self, other: &Position) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Connectivity layout of the network.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologySpec {
    /// Every node hears every other node at `snr_db`.
    FullyConnected { snr_db: f64 },
    /// Transmitters cannot hear each other; every transmitter reaches its own
    /// receiver and receiver 1.
    HiddenNode { snr_db: f64 },
    /// Transmitters hear each other, but nobody reaches a foreign receiver.
    ExposedNode { snr_db: f64 },
    /// Per-link SNR from free-space path loss. `positions` lists nodes as
    /// T1, R1, T2, R2, ... A link is in range when its SNR is at least
    /// `range_snr_db`.
    Explicit {
        positions: Vec<Position>,
        tx_power_dbm: f64,
        freq_ghz: f64,
        noise_dbm: f64,
        range_snr_db: f64,
    },
}

impl TopologySpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TopologySpec::FullyConnected { .. } => "fully_connected",
            TopologySpec::HiddenNode { .. } => "hidden_node",
            TopologySpec::ExposedNode { .. } => "exposed_node",
            TopologySpec::Explicit { .. } => "explicit",
        }
    }

    /// Common link SNR for the named layouts, `None` for explicit geometry.
    pub fn snr_db(&self) -> Option<f64> {
        match *self {
            TopologySpec::FullyConnected { snr_db }
            | TopologySpec::HiddenNode { snr_db }
            | TopologySpec::ExposedNode { snr_db } => Some(snr_db),
            TopologySpec::Explicit { .. } => None,
        }
    }

    /// Replaces the common SNR; no-op for explicit geometry.
    pub fn set_snr_db(&mut self, value: f64) {
        match self {
            TopologySpec::FullyConnected { snr_db }
            | TopologySpec::HiddenNode { snr_db }
            | TopologySpec::ExposedNode { snr_db } => *snr_db = value,
            TopologySpec::Explicit { .. } => {}
        }
    }
}

impl Default for TopologySpec {
    fn default() -> Self {
        TopologySpec::FullyConnected { snr_db: 30.0 }
    }
}

/// DCF timing and contention-window parameters (all in slots).
#[derive(Debug, Clone, PartialEq)]
pub struct CsmaParams {
    pub sifs_slots: u32,
    pub difs_slots: u32,
    pub cw_min: u32,
    pub cw_max: u32,
    pub max_retries: u32,
    pub ack_slots: u32,
}

impl Default for CsmaParams {
    fn default() -> Self {
        CsmaParams {
            sifs_slots: 8,
            difs_slots: 12,
            cw_min: 32,
            cw_max: 1024,
            max_retries: 7,
            ack_slots: 2,
        }
    }
}

impl CsmaParams {
    /// Slots a sender waits for an ACK before declaring a collision.
    pub fn ack_timeout_slots(&self) -> u32 {
        self.sifs_slots + self.ack_slots + 1
    }
}

/// Request/grant decode-error model.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorModelSpec {
    /// `p_err = p_min + (p_max - p_min) * sigmoid(slope * (mid(k) - snr))`
    /// with `mid(k) = snr_mid_db + snr_mid_step_db * (k - 1)`.
    Logistic {
        p_min: f64,
        p_max: f64,
        snr_mid_db: f64,
        snr_mid_step_db: f64,
        slope_per_db: f64,
    },
    /// Bilinear interpolation over a `(snr_db, k) -> p_err` grid.
    Table { path: PathBuf, table: ErrorTable },
    /// Constant error probability, regardless of SNR and contention.
    Fixed { p_err: f64 },
}

impl ErrorModelSpec {
    pub const DEFAULT_P_MIN: f64 = 0.001;
    pub const DEFAULT_P_MAX: f64 = 0.1;

    pub fn kind_name(&self) -> &'static str {
        match self {
            ErrorModelSpec::Logistic { .. } => "logistic",
            ErrorModelSpec::Table { .. } => "table",
            ErrorModelSpec::Fixed { .. } => "fixed",
        }
    }

    /// Default logistic curve. The midpoint moves up with every extra
    /// superposed request, so p_err(5 dB, k=4) ~ 0.1 and p_err(60 dB, k=1) ~ 0.001.
    pub fn default_logistic() -> Self {
        ErrorModelSpec::Logistic {
            p_min: Self::DEFAULT_P_MIN,
            p_max: Self::DEFAULT_P_MAX,
            snr_mid_db: 5.0,
            snr_mid_step_db: 5.0,
            slope_per_db: 0.4,
        }
    }
}

impl Default for ErrorModelSpec {
    fn default() -> Self {
        Self::default_logistic()
    }
}

/// Time base of `arrival_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalUnit {
    /// `arrival_rate` packets per slot.
    Slot,
    /// `arrival_rate` packets per data-packet duration (`packet_len_slots`).
    Packet,
    /// `arrival_rate` packets per data-packet duration for the whole
    /// network, split evenly over the pairs.
    Network,
}

impl ArrivalUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            ArrivalUnit::Slot => "slot",
            ArrivalUnit::Packet => "packet",
            ArrivalUnit::Network => "network",
        }
    }
}

/// What a GSD-MA network does with a reservation whose grantee failed to
/// decode its own grant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrantFailurePolicy {
    /// The reserved data period stays idle.
    IdleReservation,
    /// Nobody transmitted, so the next request slot follows immediately.
    Recontend,
}

impl GrantFailurePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            GrantFailurePolicy::IdleReservation => "idle",
            GrantFailurePolicy::Recontend => "recontend",
        }
    }
}

/// Start instant of the access-delay clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayReference {
    HeadOfLine,
    Arrival,
}

impl DelayReference {
    pub fn as_str(self) -> &'static str {
        match self {
            DelayReference::HeadOfLine => "head_of_line",
            DelayReference::Arrival => "arrival",
        }
    }
}

/// Full description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub protocol: Protocol,
    pub num_pairs: usize,
    /// Upper bound on `num_pairs`.
    pub max_pairs: usize,
    pub topology: TopologySpec,
    pub slot_time_us: f64,
    pub packet_len_slots: u32,
    /// Informational only; durations are slot driven.
    pub link_rate_mbps: f64,
    pub arrival_rate: f64,
    pub arrival_unit: ArrivalUnit,
    /// Tail-drop queue capacity in packets; `None` is unbounded.
    pub queue_cap: Option<usize>,
    pub priority_scheme: PriorityScheme,
    pub error_model: ErrorModelSpec,
    /// Requests beyond this many superposed in-range messages never decode.
    pub decode_cap: usize,
    pub grant_failure: GrantFailurePolicy,
    pub delay_reference: DelayReference,
    pub csma: CsmaParams,
    pub sim_slots: u64,
    /// `None` resolves to 5% of `sim_slots`.
    pub warmup_slots: Option<u64>,
    pub seed: u64,
    /// Batches for the batch-means efficiency interval.
    pub batches: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            protocol: Protocol::GsdMa,
            num_pairs: 2,
            max_pairs: 4,
            topology: TopologySpec::default(),
            slot_time_us: 20.0,
            packet_len_slots: 50,
            link_rate_mbps: 10.0,
            arrival_rate: 0.5,
            arrival_unit: ArrivalUnit::Network,
            queue_cap: None,
            priority_scheme: PriorityScheme::default(),
            error_model: ErrorModelSpec::default(),
            decode_cap: 4,
            grant_failure: GrantFailurePolicy::IdleReservation,
            delay_reference: DelayReference::HeadOfLine,
            csma: CsmaParams::default(),
            sim_slots: 200_000,
            warmup_slots: None,
            seed: 1,
            batches: 10,
        }
    }
}

impl ScenarioConfig {
    /// Per-slot Bernoulli arrival probability implied by `arrival_rate`.
    pub fn arrival_prob_per_slot(&self) -> f64 {
        match self.arrival_unit {
            ArrivalUnit::Slot => self.arrival_rate,
            ArrivalUnit::Packet => self.arrival_rate / f64::from(self.packet_len_slots.max(1)),
            ArrivalUnit::Network => {
                self.arrival_rate / (f64::from(self.packet_len_slots.max(1)) * self.num_pairs.max(1) as f64)
            }
        }
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: &'static str,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

/// Every invariant a configuration violates.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid scenario: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationError(pub Vec<FieldError>);

impl ValidationError {
    pub fn fields(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.0.iter().map(|e| e.field)
    }

    pub fn has_field(&self, field: &str) -> bool {
        self.0.iter().any(|e| e.field == field)
    }
}

/// A checked configuration with derived defaults resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    inner: ScenarioConfig,
    warmup_slots: u64,
}

impl ValidatedConfig {
    pub fn warmup_slots(&self) -> u64 {
        self.warmup_slots
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.inner
    }

    pub fn into_inner(self) -> ScenarioConfig {
        self.inner
    }

    /// Priority of each pair under `StaticUnique`; 1 is highest.
    pub fn static_priorities(&self) -> Option<Vec<u32>> {
        match &self.inner.priority_scheme {
            PriorityScheme::StaticUnique { priorities } if priorities.is_empty() => {
                Some((1..=self.inner.num_pairs as u32).collect())
            }
            PriorityScheme::StaticUnique { priorities } => Some(priorities.clone()),
            PriorityScheme::QueueLength { .. } => None,
        }
    }
}

impl Deref for ValidatedConfig {
    type Target = ScenarioConfig;

    fn deref(&self) -> &ScenarioConfig {
        &self.inner
    }
}

fn is_probability(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

/// Checks every invariant and resolves defaults.
pub fn validate(config: ScenarioConfig) -> Result<ValidatedConfig, ValidationError> {
    let mut errs = Vec::new();
    let mut fail = |field: &'static str, reason: String| errs.push(FieldError { field, reason });
    let c = &config;

    if c.num_pairs == 0 {
        fail("num_pairs", "must be at least 1".into());
    }
    if c.num_pairs > c.max_pairs {
        fail(
            "num_pairs",
            format!("{} exceeds max_pairs = {}", c.num_pairs, c.max_pairs),
        );
    }
    if c.packet_len_slots == 0 {
        fail("packet_len_slots", "must be at least 1".into());
    }
    if !(c.slot_time_us > 0.0 && c.slot_time_us.is_finite()) {
        fail("slot_time_us", "must be positive".into());
    }
    if !(c.link_rate_mbps > 0.0 && c.link_rate_mbps.is_finite()) {
        fail("link_rate_mbps", "must be positive".into());
    }
    if !(c.arrival_rate > 0.0 && c.arrival_rate <= 1.0) {
        fail(
            "arrival_rate",
            format!("{} is outside (0, 1]", c.arrival_rate),
        );
    }
    if c.queue_cap == Some(0) {
        fail("queue_cap", "must be at least 1 when set".into());
    }
    if c.decode_cap == 0 {
        fail("decode_cap", "must be at least 1".into());
    }
    if c.batches == 0 {
        fail("batches", "must be at least 1".into());
    }
    let warmup = c.warmup_slots.unwrap_or(c.sim_slots / 20);
    if c.sim_slots <= warmup {
        fail(
            "sim_slots",
            format!("{} must exceed warmup_slots = {}", c.sim_slots, warmup),
        );
    }

    match &c.priority_scheme {
        PriorityScheme::QueueLength {
            quantization_levels,
        } => {
            if *quantization_levels < 2 {
                fail("priority_scheme", "quantization_levels must be at least 2".into());
            }
        }
        PriorityScheme::StaticUnique { priorities } if !priorities.is_empty() => {
            let mut sorted = priorities.clone();
            sorted.sort_unstable();
            let expected: Vec<u32> = (1..=c.num_pairs as u32).collect();
            if sorted != expected {
                fail(
                    "priority_scheme",
                    format!(
                        "priorities {priorities:?} are not a permutation of 1..={}",
                        c.num_pairs
                    ),
                );
            }
        }
        PriorityScheme::StaticUnique { .. } => {}
    }

    match &c.topology {
        TopologySpec::FullyConnected { snr_db } => {
            if !snr_db.is_finite() {
                fail("topology", "snr_db must be finite".into());
            }
        }
        TopologySpec::HiddenNode { snr_db } | TopologySpec::ExposedNode { snr_db } => {
            if !snr_db.is_finite() {
                fail("topology", "snr_db must be finite".into());
            }
            if c.num_pairs < 2 {
                fail(
                    "topology",
                    format!("{} needs at least 2 pairs", c.topology.kind_name()),
                );
            }
        }
        TopologySpec::Explicit {
            positions,
            freq_ghz,
            tx_power_dbm,
            noise_dbm,
            range_snr_db,
        } => {
            if positions.len() != 2 * c.num_pairs {
                fail(
                    "topology",
                    format!(
                        "expected {} positions (T and R per pair), got {}",
                        2 * c.num_pairs,
                        positions.len()
                    ),
                );
            }
            if !(*freq_ghz > 0.0 && freq_ghz.is_finite()) {
                fail("topology", "freq_ghz must be positive".into());
            }
            if !(tx_power_dbm.is_finite() && noise_dbm.is_finite() && range_snr_db.is_finite()) {
                fail("topology", "power, noise and range threshold must be finite".into());
            }
            if positions.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
                fail("topology", "positions must be finite".into());
            }
        }
    }

    match &c.error_model {
        ErrorModelSpec::Logistic {
            p_min,
            p_max,
            snr_mid_db,
            snr_mid_step_db,
            slope_per_db,
        } => {
            if !(is_probability(*p_min) && is_probability(*p_max) && p_min <= p_max) {
                fail("error_model", "need 0 <= p_min <= p_max <= 1".into());
            }
            if !(*slope_per_db > 0.0 && slope_per_db.is_finite()) {
                fail("error_model", "slope_per_db must be positive".into());
            }
            if !(*snr_mid_step_db >= 0.0 && snr_mid_db.is_finite() && snr_mid_step_db.is_finite())
            {
                fail("error_model", "snr_mid_step_db must be non-negative".into());
            }
        }
        ErrorModelSpec::Table { table, .. } => {
            if let Err(reason) = table.check_monotone() {
                fail("error_model", reason);
            }
        }
        ErrorModelSpec::Fixed { p_err } => {
            if !is_probability(*p_err) {
                fail("error_model", format!("p_err = {p_err} is not a probability"));
            }
        }
    }

    let cs = &c.csma;
    if !(cs.cw_min.is_power_of_two() && cs.cw_max.is_power_of_two()) {
        fail("csma", "cw_min and cw_max must be powers of two".into());
    }
    if cs.cw_min > cs.cw_max {
        fail("csma", "cw_min must not exceed cw_max".into());
    }
    if cs.sifs_slots >= cs.difs_slots {
        fail("csma", "sifs_slots must be shorter than difs_slots".into());
    }
    if cs.ack_slots == 0 {
        fail("csma", "ack_slots must be at least 1".into());
    }

    if errs.is_empty() {
        Ok(ValidatedConfig {
            inner: config,
            warmup_slots: warmup,
        })
    } else {
        Err(ValidationError(errs))
    }
}
