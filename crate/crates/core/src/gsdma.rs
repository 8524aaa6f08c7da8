//! GSD-MA request/grant arbitration.
//!
//! Every contention cycle opens with a request slot, in which each backlogged
//! transmitter sends `(id, priority)`, and a grant slot, in which a receiver
//! grants its own transmitter if that transmitter is the highest-priority
//! request it decoded. A transmitter sends data only when it decodes its own
//! grant and no grant for a higher-priority transmitter.

use std::cmp::{Ordering, Reverse};

use crate::config::PriorityScheme;
use crate::node::{NodeId, PairId};
use crate::traffic::quantized_queue_priority;

/// How priority values rank. Ties on value fall back to the lower node id.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorityPolicy {
    /// Quantized queue length; larger wins.
    QueueLength { levels: u32 },
    /// `ranks[pair]`, 1 is highest.
    Static { ranks: Vec<u32> },
}

impl PriorityPolicy {
    pub fn from_scheme(scheme: &PriorityScheme, num_pairs: usize) -> Self {
        match scheme {
            PriorityScheme::QueueLength {
                quantization_levels,
            } => PriorityPolicy::QueueLength {
                levels: *quantization_levels,
            },
            PriorityScheme::StaticUnique { priorities } if priorities.is_empty() => PriorityPolicy::Static {
                ranks: (1..=num_pairs as u32).collect(),
            },
            PriorityScheme::StaticUnique { priorities } => PriorityPolicy::Static {
                ranks: priorities.clone(),
            },
        }
    }

    /// Priority value carried in a request.
    pub fn priority_of(&self, pair: PairId, queue_len: usize) -> u32 {
        match self {
            PriorityPolicy::QueueLength { levels } => quantized_queue_priority(queue_len, *levels),
            PriorityPolicy::Static { ranks } => ranks[pair.0],
        }
    }

    /// Total order on `(priority, transmitter)`; `Greater` means `a` wins.
    pub fn compare(&self, a: (u32, NodeId), b: (u32, NodeId)) -> Ordering {
        let value = match self {
            PriorityPolicy::QueueLength { .. } => a.0.cmp(&b.0),
            PriorityPolicy::Static { .. } => b.0.cmp(&a.0),
        };
        value.then_with(|| Reverse(a.1).cmp(&Reverse(b.1)))
    }

    pub fn outranks(&self, a: (u32, NodeId), b: (u32, NodeId)) -> bool {
        self.compare(a, b) == Ordering::Greater
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestMsg {
    pub tx_id: NodeId,
    pub priority: u32,
}

impl RequestMsg {
    fn key(&self) -> (u32, NodeId) {
        (self.priority, self.tx_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrantMsg {
    pub granted_tx_id: NodeId,
    pub granted_priority: u32,
}

impl GrantMsg {
    fn key(&self) -> (u32, NodeId) {
        (self.granted_priority, self.granted_tx_id)
    }
}

/// Transmitter activity within the cycle framing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairPhase {
    #[default]
    Idle,
    AwaitGrant,
    Transmitting { slots_left: u32 },
    Deferring { slots_left: u32 },
}

impl PairPhase {
    /// May send a request in the coming request slot.
    pub fn can_contend(&self) -> bool {
        matches!(self, PairPhase::Idle)
    }

    /// Advances a data or deferral period by one slot.
    pub fn tick(self) -> PairPhase {
        match self {
            PairPhase::Transmitting { slots_left: 1 } | PairPhase::Deferring { slots_left: 1 } => PairPhase::Idle,
            PairPhase::Transmitting { slots_left } => PairPhase::Transmitting {
                slots_left: slots_left - 1,
            },
            PairPhase::Deferring { slots_left } => PairPhase::Deferring {
                slots_left: slots_left - 1,
            },
            other => other,
        }
    }
}

/// Request a backlogged pair sends in a request slot.
pub fn tx_request_decision(
    pair: PairId,
    phase: PairPhase,
    queue_len: usize,
    policy: &PriorityPolicy,
) -> Option<RequestMsg> {
    (queue_len > 0 && phase.can_contend()).then(|| RequestMsg {
        tx_id: pair.transmitter(),
        priority: policy.priority_of(pair, queue_len),
    })
}

/// Highest-ranked request in `requests`.
pub fn highest_request<'a>(requests: &'a [RequestMsg], policy: &PriorityPolicy) -> Option<&'a RequestMsg> {
    requests.iter().max_by(|a, b| policy.compare(a.key(), b.key()))
}

/// A receiver grants its own transmitter iff that transmitter's request was
/// decoded and outranks every other decoded request.
pub fn rx_grant_decision(decoded: &[RequestMsg], own_tx: NodeId, policy: &PriorityPolicy) -> Option<GrantMsg> {
    let best = highest_request(decoded, policy)?;
    (best.tx_id == own_tx).then_some(GrantMsg {
        granted_tx_id: best.tx_id,
        granted_priority: best.priority,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxDecision {
    TransmitData,
    /// Another transmitter holds the reservation.
    Defer,
    /// Nothing decoded; try again next request slot.
    Recontend,
}

/// What a requesting transmitter does after the grant slot.
pub fn tx_transmit_decision(decoded: &[GrantMsg], own_id: NodeId, policy: &PriorityPolicy) -> TxDecision {
    let Some(own) = decoded.iter().find(|g| g.granted_tx_id == own_id) else {
        return if decoded.is_empty() {
            TxDecision::Recontend
        } else {
            TxDecision::Defer
        };
    };
    let beaten = decoded
        .iter()
        .any(|g| g.granted_tx_id != own_id && policy.outranks(g.key(), own.key()));
    if beaten {
        TxDecision::Defer
    } else {
        TxDecision::TransmitData
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(i: usize) -> NodeId {
        PairId(i).transmitter()
    }

    fn static_policy(n: usize) -> PriorityPolicy {
        PriorityPolicy::Static {
            ranks: (1..=n as u32).collect(),
        }
    }

    #[test]
    fn request_carries_static_priority() {
        let policy = PriorityPolicy::Static { ranks: vec![1, 2] };
        let req = tx_request_decision(PairId(1), PairPhase::Idle, 4, &policy).unwrap();
        assert_eq!(req, RequestMsg { tx_id: tx(1), priority: 2 });
    }

    #[test]
    fn empty_queue_sends_nothing() {
        let policy = static_policy(2);
        assert_eq!(tx_request_decision(PairId(0), PairPhase::Idle, 0, &policy), None);
    }

    #[test]
    fn deferring_pair_does_not_request() {
        let policy = static_policy(2);
        let phase = PairPhase::Deferring { slots_left: 3 };
        assert_eq!(tx_request_decision(PairId(0), phase, 5, &policy), None);
    }

    #[test]
    fn queue_length_request_priority() {
        let policy = PriorityPolicy::QueueLength { levels: 8 };
        let req = tx_request_decision(PairId(0), PairPhase::Idle, 3, &policy).unwrap();
        assert_eq!(req.priority, 3);
    }

    #[test]
    fn ties_break_toward_lower_node_id() {
        let policy = PriorityPolicy::QueueLength { levels: 8 };
        assert!(policy.outranks((7, tx(0)), (7, tx(1))));
        assert!(policy.outranks((7, tx(2)), (6, tx(0))));
        let policy = static_policy(3);
        assert!(policy.outranks((1, tx(2)), (2, tx(0))));
    }

    #[test]
    fn hidden_node_grants() {
        let policy = PriorityPolicy::Static { ranks: vec![1, 2] };
        let r1 = [
            RequestMsg { tx_id: tx(0), priority: 1 },
            RequestMsg { tx_id: tx(1), priority: 2 },
        ];
        assert_eq!(
            rx_grant_decision(&r1, tx(0), &policy),
            Some(GrantMsg { granted_tx_id: tx(0), granted_priority: 1 })
        );
        let r2 = [RequestMsg { tx_id: tx(1), priority: 2 }];
        assert_eq!(
            rx_grant_decision(&r2, tx(1), &policy),
            Some(GrantMsg { granted_tx_id: tx(1), granted_priority: 2 })
        );
    }

    #[test]
    fn no_grant_without_own_request() {
        let policy = static_policy(3);
        let decoded = [RequestMsg { tx_id: tx(1), priority: 2 }];
        assert_eq!(rx_grant_decision(&decoded, tx(0), &policy), None);
        assert_eq!(rx_grant_decision(&[], tx(0), &policy), None);
    }

    #[test]
    fn hidden_node_low_priority_defers() {
        let policy = PriorityPolicy::Static { ranks: vec![1, 2] };
        let g1 = GrantMsg { granted_tx_id: tx(0), granted_priority: 1 };
        let g2 = GrantMsg { granted_tx_id: tx(1), granted_priority: 2 };
        assert_eq!(tx_transmit_decision(&[g1, g2], tx(1), &policy), TxDecision::Defer);
        assert_eq!(tx_transmit_decision(&[g1], tx(0), &policy), TxDecision::TransmitData);
    }

    #[test]
    fn exposed_node_both_transmit() {
        let policy = PriorityPolicy::Static { ranks: vec![1, 2] };
        let g1 = GrantMsg { granted_tx_id: tx(0), granted_priority: 1 };
        let g2 = GrantMsg { granted_tx_id: tx(1), granted_priority: 2 };
        assert_eq!(tx_transmit_decision(&[g1], tx(0), &policy), TxDecision::TransmitData);
        assert_eq!(tx_transmit_decision(&[g2], tx(1), &policy), TxDecision::TransmitData);
    }

    #[test]
    fn nothing_decoded_recontends() {
        let policy = static_policy(2);
        assert_eq!(tx_transmit_decision(&[], tx(0), &policy), TxDecision::Recontend);
    }

    #[test]
    fn phase_countdown() {
        let mut phase = PairPhase::Deferring { slots_left: 3 };
        for _ in 0..2 {
            phase = phase.tick();
            assert!(!phase.can_contend());
        }
        assert_eq!(phase.tick(), PairPhase::Idle);
    }
}
