//! Slot-level simulation of collision-resolving channel access for pairwise
//! wireless networks.
//!
//! GSD-MA lets short request and grant messages collide and resolves them at
//! the receivers, so nobody senses the carrier or backs off. This crate
//! simulates it next to an 802.11 DCF baseline on the same topologies and
//! traffic, and evaluates the closed-form access model.
//!
//! ```
//! use gsdma_core::config::{validate, ScenarioConfig};
//!
//! let cfg = validate(ScenarioConfig { sim_slots: 20_000, ..Default::default() }).unwrap();
//! let report = gsdma_core::engine::run(&cfg).unwrap();
//! assert!(report.aggregate.efficiency.unwrap() <= 1.0);
//! ```

pub mod analysis;
pub mod channel;
pub mod config;
pub mod csma;
pub mod engine;
pub mod gsdma;
pub mod node;
pub mod scenario_file;
pub mod stats;
pub mod traffic;

pub use config::{validate, ScenarioConfig, ValidatedConfig};
pub use engine::{run, MetricsReport};
pub use node::{NodeId, PairId};
