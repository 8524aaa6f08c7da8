use crate::gsdma::{GrantMsg, RequestMsg};
use crate::node::PairId;

/// One GSD-MA contention cycle as seen network-wide.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    /// Slot of the request slot.
    pub start_slot: u64,
    /// Request slot + grant slot + reserved data slots.
    pub len_slots: u64,
    pub requests: Vec<RequestMsg>,
    /// Grants issued, by issuing pair's receiver.
    pub grants: Vec<(PairId, GrantMsg)>,
    /// Pairs that sent data in this cycle.
    pub winners: Vec<PairId>,
    /// Control-message decode attempts (request and grant slots).
    pub decode_attempts: u32,
    pub decode_failures: u32,
    /// Inside the measurement window.
    pub measured: bool,
}

impl CycleRecord {
    pub fn requesters(&self) -> impl Iterator<Item = PairId> + '_ {
        self.requests.iter().map(|r| r.tx_id.pair())
    }
}

/// Cycle-level record of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub cycles: Vec<CycleRecord>,
    /// Per pair: for every measured packet, the 1-based index of the cycle (among the
    /// cycles that packet contended in) in which it first gained access.
    pub first_access: Vec<Vec<u32>>,
}

impl Trace {
    pub fn measured_cycles(&self) -> impl Iterator<Item = &CycleRecord> {
        self.cycles.iter().filter(|c| c.measured)
    }
}
