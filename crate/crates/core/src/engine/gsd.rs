//! Network-aligned GSD-MA cycle loop.
//!
//! Slot `t` is a request slot and `t + 1` the grant slot. If anybody got a
//! reservation the next `packet_len_slots` carry data, otherwise `t + 2` is
//! the next request slot.

use super::metrics::{Accounting, SlotClass};
use super::trace::{CycleRecord, Trace};
use super::Streams;
use crate::channel::{Channel, LinkTable};
use crate::config::{DelayReference, GrantFailurePolicy, ValidatedConfig};
use crate::gsdma::{
    rx_grant_decision, tx_request_decision, tx_transmit_decision, GrantMsg, PairPhase, PriorityPolicy, RequestMsg,
    TxDecision,
};
use crate::node::{NodeId, PairId};
use crate::traffic::{sample_arrivals, TxQueue};

struct Pair {
    queue: TxQueue,
    phase: PairPhase,
    /// Cycles the head packet has contended in so far.
    attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Idle,
    Winner,
    Loser,
}

pub(super) fn run(
    cfg: &ValidatedConfig,
    links: &LinkTable,
    channel: Channel<'_>,
    streams: &mut Streams,
    acc: &mut Accounting,
    mut trace: Option<&mut Trace>,
) {
    let n = cfg.num_pairs;
    let len = u64::from(cfg.packet_len_slots);
    let policy = PriorityPolicy::from_scheme(&cfg.priority_scheme, n);
    let p_arrival = cfg.arrival_prob_per_slot();
    let mut pairs: Vec<Pair> = (0..n)
        .map(|_| Pair {
            queue: TxQueue::new(cfg.queue_cap),
            phase: PairPhase::Idle,
            attempts: 0,
        })
        .collect();
    let interact: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| links.pairs_interact(PairId(i), PairId(j))).collect())
        .collect();

    let arrive = |pairs: &mut [Pair], slot: u64, streams: &mut Streams, acc: &mut Accounting| {
        for (i, p) in pairs.iter_mut().enumerate() {
            if sample_arrivals(p_arrival, &mut streams.traffic) == 1 && !p.queue.offer(slot) {
                acc.dropped(PairId(i), slot);
            }
        }
    };

    let mut t = 0u64;
    // Only whole cycles are simulated.
    while t + 2 + len <= cfg.sim_slots {
        arrive(&mut pairs, t, streams, acc);

        // Request slot.
        let requests: Vec<(NodeId, RequestMsg)> = pairs
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                tx_request_decision(PairId(i), p.phase, p.queue.len(), &policy).map(|r| (r.tx_id, r))
            })
            .collect();
        let mut decode_attempts = 0;
        let mut decode_failures = 0;
        let mut grants: Vec<(NodeId, GrantMsg)> = Vec::new();
        for i in 0..n {
            let rx = PairId(i).receiver();
            let (decoded, stats) = channel.decode_outcomes(&requests, rx, &mut streams.protocol);
            decode_attempts += stats.attempted;
            decode_failures += stats.failed;
            if let Some(g) = rx_grant_decision(&decoded, PairId(i).transmitter(), &policy) {
                debug_assert!(decoded.iter().any(|r| r.tx_id == g.granted_tx_id));
                grants.push((rx, g));
            }
        }

        // Grant slot.
        arrive(&mut pairs, t + 1, streams, acc);
        let mut decisions = vec![None; n];
        for &(tx, _) in &requests {
            let (decoded, stats) = channel.decode_outcomes(&grants, tx, &mut streams.protocol);
            decode_attempts += stats.attempted;
            decode_failures += stats.failed;
            decisions[tx.pair().0] = Some(tx_transmit_decision(&decoded, tx, &policy));
        }
        let winners: Vec<PairId> = (0..n)
            .filter(|&i| decisions[i] == Some(TxDecision::TransmitData))
            .map(PairId)
            .collect();
        let reserved = !winners.is_empty()
            || (cfg.grant_failure == GrantFailurePolicy::IdleReservation && !grants.is_empty());
        let cycle_len = if reserved { 2 + len } else { 2 };
        let measured = acc.measured(t);

        let roles: Vec<Role> = (0..n)
            .map(|i| match decisions[i] {
                Some(TxDecision::TransmitData) => Role::Winner,
                Some(_) => Role::Loser,
                None => Role::Idle,
            })
            .collect();

        for (i, p) in pairs.iter_mut().enumerate() {
            match roles[i] {
                Role::Winner => {
                    let data_start = t + 2;
                    let head = p.queue.head().expect("winner has a packet");
                    let reference = match cfg.delay_reference {
                        DelayReference::HeadOfLine => p.queue.head_since().expect("non-empty queue"),
                        DelayReference::Arrival => head.arrival_slot,
                    };
                    debug_assert!(data_start >= reference + 2);
                    if measured {
                        acc.delay_slots(PairId(i), data_start, reference);
                        if let Some(tr) = trace.as_deref_mut() {
                            tr.first_access[i].push(p.attempts + 1);
                        }
                    }
                    p.attempts = 0;
                    p.phase = PairPhase::Transmitting {
                        slots_left: cfg.packet_len_slots,
                    };
                }
                Role::Loser => {
                    p.attempts += 1;
                    if reserved {
                        p.phase = PairPhase::Deferring {
                            slots_left: cfg.packet_len_slots,
                        };
                    }
                }
                Role::Idle => {
                    if reserved {
                        p.phase = PairPhase::Deferring {
                            slots_left: cfg.packet_len_slots,
                        };
                    }
                }
            }
        }

        if measured {
            for i in 0..n {
                let pair = PairId(i);
                match roles[i] {
                    Role::Winner => acc.add(pair, t, SlotClass::Data, len),
                    Role::Loser => {
                        let domain_won = winners.iter().any(|w| interact[i][w.0]);
                        if domain_won {
                            acc.add(pair, t, SlotClass::Waiting, cycle_len);
                        } else if !winners.is_empty() {
                            acc.add(pair, t, SlotClass::Error, 2);
                            acc.add(pair, t, SlotClass::Waiting, cycle_len - 2);
                        } else {
                            acc.add(pair, t, SlotClass::Error, cycle_len);
                        }
                    }
                    Role::Idle => {
                        // Became backlogged during the grant slot.
                        if reserved && !pairs[i].queue.is_empty() {
                            acc.add(pair, t, SlotClass::Waiting, cycle_len - 1);
                        }
                    }
                }
            }
        }

        // Data / reservation slots.
        for s in t + 2..t + cycle_len {
            let before: Vec<bool> = pairs.iter().map(|p| p.queue.is_empty()).collect();
            arrive(&mut pairs, s, streams, acc);
            for (i, p) in pairs.iter_mut().enumerate() {
                if roles[i] == Role::Idle && before[i] && !p.queue.is_empty() {
                    // Newly backlogged mid-reservation: waits out the rest of it.
                    acc.add(PairId(i), t, SlotClass::Waiting, t + cycle_len - s);
                }
                p.phase = p.phase.tick();
            }
        }

        let next = t + cycle_len;
        for &w in &winners {
            let p = &mut pairs[w.0];
            p.queue.pop_head(next);
            if measured {
                acc.served(w, t);
            }
            p.phase = PairPhase::Idle;
        }
        for p in pairs.iter_mut() {
            p.phase = PairPhase::Idle;
            debug_assert!(p.queue.is_conserved());
        }

        if let Some(tr) = trace.as_deref_mut() {
            tr.cycles.push(CycleRecord {
                start_slot: t,
                len_slots: cycle_len,
                requests: requests.iter().map(|&(_, r)| r).collect(),
                grants: grants.iter().map(|&(rx, g)| (rx.pair(), g)).collect(),
                winners,
                decode_attempts,
                decode_failures,
                measured,
            });
        }
        t = next;
    }
}
