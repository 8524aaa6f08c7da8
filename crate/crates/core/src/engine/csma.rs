//! Slot loop for the DCF baseline.

use super::metrics::{Accounting, SlotClass};
use super::Streams;
use crate::channel::LinkTable;
use crate::config::{DelayReference, ValidatedConfig};
use crate::csma::{carrier_sense, dcf_step, responder_step, DcfEvent, DcfInput, DcfPhase, DcfState, ResponderPhase};
use crate::node::{NodeId, PairId};
use crate::traffic::{sample_arrivals, TxQueue};

struct Station {
    queue: TxQueue,
    dcf: DcfState,
    responder: ResponderPhase,
    /// Receiver finished an ACK last slot.
    ack_ready: bool,
    /// Receiver should start SIFS this slot.
    frame_ok: bool,
    /// Current frame was hit by an overlapping in-range transmission.
    corrupted: bool,
    attempt_start: u64,
    /// Measured AwaitAck slots of the current attempt.
    await_slots: u64,
}

pub(super) fn run(cfg: &ValidatedConfig, links: &LinkTable, streams: &mut Streams, acc: &mut Accounting) {
    let n = cfg.num_pairs;
    let params = &cfg.csma;
    let len = u64::from(cfg.packet_len_slots);
    let p_arrival = cfg.arrival_prob_per_slot();
    let mut st: Vec<Station> = (0..n)
        .map(|_| Station {
            queue: TxQueue::new(cfg.queue_cap),
            dcf: DcfState::new(params),
            responder: ResponderPhase::Idle,
            ack_ready: false,
            frame_ok: false,
            corrupted: false,
            attempt_start: 0,
            await_slots: 0,
        })
        .collect();
    let mut ongoing: Vec<NodeId> = Vec::with_capacity(2 * n);
    let mut sending: Vec<bool> = vec![false; n];

    for t in 0..cfg.sim_slots {
        for (i, s) in st.iter_mut().enumerate() {
            if sample_arrivals(p_arrival, &mut streams.traffic) == 1 && !s.queue.offer(t) {
                acc.dropped(PairId(i), t);
            }
        }

        // Radios that started before this slot and are still on air.
        ongoing.clear();
        for (i, s) in st.iter().enumerate() {
            if s.dcf.is_sending_data() {
                ongoing.push(PairId(i).transmitter());
            }
            if matches!(s.responder, ResponderPhase::SendingAck { slots_left } if slots_left < params.ack_slots) {
                ongoing.push(PairId(i).receiver());
            }
        }

        for (i, s) in st.iter_mut().enumerate() {
            let pair = PairId(i);
            let me = pair.transmitter();
            let was_awaiting = matches!(s.dcf.phase, DcfPhase::AwaitAck { .. });
            let was_sending = s.dcf.is_sending_data();
            let input = DcfInput {
                sensed_busy: carrier_sense(me, &ongoing, links),
                backlog: s.queue.len(),
                ack_received: s.ack_ready,
            };
            let (next, event) = dcf_step(s.dcf, input, params, cfg.packet_len_slots, &mut streams.protocol);
            s.dcf = next;
            sending[i] = was_sending || event == DcfEvent::StartData;

            match event {
                DcfEvent::StartData => {
                    s.attempt_start = t;
                    s.corrupted = false;
                    s.await_slots = 0;
                }
                DcfEvent::Delivered => {
                    if acc.measured(s.attempt_start) {
                        let reference = match cfg.delay_reference {
                            DelayReference::HeadOfLine => s.queue.head_since().expect("packet in service"),
                            DelayReference::Arrival => s.queue.head().expect("packet in service").arrival_slot,
                        };
                        acc.delay_slots(pair, s.attempt_start, reference);
                        acc.add(pair, s.attempt_start, SlotClass::Data, len);
                        acc.served(pair, s.attempt_start);
                    }
                    acc.add(pair, t - 1, SlotClass::Waiting, s.await_slots);
                    s.queue.pop_head(t);
                }
                DcfEvent::Collided | DcfEvent::Dropped => {
                    if acc.measured(s.attempt_start) {
                        acc.add(pair, s.attempt_start, SlotClass::Error, len);
                    }
                    acc.add(pair, t - 1, SlotClass::Error, s.await_slots);
                    if event == DcfEvent::Dropped {
                        acc.dropped(pair, t);
                        s.queue.pop_head(t);
                    }
                }
                DcfEvent::None => {}
            }

            // Per-slot booking of everything except attempt slots.
            if !sending[i] {
                if was_awaiting && event == DcfEvent::None {
                    if acc.measured(t) {
                        s.await_slots += 1;
                    }
                } else if !s.queue.is_empty() {
                    acc.add(pair, t, SlotClass::Waiting, 1);
                }
            }
            debug_assert!(s.queue.is_conserved());
        }

        // Collisions at receivers: any other in-range data sender overlaps.
        for i in 0..n {
            if !sending[i] {
                continue;
            }
            let rx = PairId(i).receiver();
            if (0..n).any(|j| j != i && sending[j] && links.in_range(PairId(j).transmitter(), rx)) {
                st[i].corrupted = true;
            }
        }

        for (i, s) in st.iter_mut().enumerate() {
            let (phase, out) = responder_step(s.responder, s.frame_ok, params);
            s.responder = phase;
            s.ack_ready = out.ack_done;
            let frame_ended = sending[i] && !s.dcf.is_sending_data();
            s.frame_ok = frame_ended && !s.corrupted;
        }
    }
}
