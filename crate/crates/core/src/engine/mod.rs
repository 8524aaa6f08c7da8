//! Slot-synchronous simulation driver.
//!
//! One engine instance owns every pair's state and both RNG streams and is
//! strictly single threaded. Arrivals draw from their own stream, so two runs
//! with the same seed see identical traffic whatever the protocol does.

mod csma;
mod gsd;
mod metrics;
mod synthetic;
mod trace;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use metrics::{AggregateMetrics, MetricsReport, PairMetrics, SlotClass, SlotCounts};
pub use synthetic::{synthetic_first_access, GeometricSample};
pub use trace::{CycleRecord, Trace};

use crate::channel::{build_link_table, Channel, ErrorModel, TopologyError};
use crate::config::{Protocol, ValidatedConfig};
use metrics::Accounting;

const TRAFFIC_STREAM: u64 = 0;
const PROTOCOL_STREAM: u64 = 1;

pub(crate) struct Streams {
    pub traffic: ChaCha8Rng,
    pub protocol: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let mut traffic = ChaCha8Rng::seed_from_u64(seed);
        traffic.set_stream(TRAFFIC_STREAM);
        let mut protocol = ChaCha8Rng::seed_from_u64(seed);
        protocol.set_stream(PROTOCOL_STREAM);
        Streams { traffic, protocol }
    }
}

/// Runs one scenario.
pub fn run(cfg: &ValidatedConfig) -> Result<MetricsReport, TopologyError> {
    simulate(cfg, None)
}

/// Runs one scenario and records the GSD-MA cycle trace (empty for the DCF
/// baseline).
pub fn run_traced(cfg: &ValidatedConfig) -> Result<(MetricsReport, Trace), TopologyError> {
    let mut trace = Trace {
        cycles: Vec::new(),
        first_access: vec![Vec::new(); cfg.num_pairs],
    };
    let report = simulate(cfg, Some(&mut trace))?;
    Ok((report, trace))
}

fn simulate(cfg: &ValidatedConfig, trace: Option<&mut Trace>) -> Result<MetricsReport, TopologyError> {
    let links = build_link_table(&cfg.topology, cfg.num_pairs)?;
    let errors = ErrorModel::from_spec(&cfg.error_model);
    let mut streams = Streams::new(cfg.seed);
    let mut acc = Accounting::new(cfg);
    match cfg.protocol {
        Protocol::GsdMa => {
            let channel = Channel {
                links: &links,
                errors: &errors,
                decode_cap: cfg.decode_cap,
            };
            gsd::run(cfg, &links, channel, &mut streams, &mut acc, trace);
        }
        Protocol::CsmaCa => csma::run(cfg, &links, &mut streams, &mut acc),
    }
    Ok(acc.finish(cfg))
}
