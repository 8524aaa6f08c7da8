//! 802.11 DCF basic access (no RTS/CTS) as per-slot state machines.
//!
//! A backlogged station senses DIFS idle slots, counts down a backoff drawn
//! uniformly from `[0, cw - 1]` while the medium stays idle, then sends its
//! data frame. The receiver answers a clean frame with an ACK after SIFS. A
//! missing ACK doubles `cw` up to `cw_max`; success resets it to `cw_min`.

use rand::Rng;

use crate::channel::LinkTable;
use crate::config::CsmaParams;
use crate::node::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcfPhase {
    Idle,
    Difs { slots_left: u32 },
    Backoff { counter: u32 },
    TxData { slots_left: u32 },
    AwaitAck { slots_left: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DcfState {
    pub phase: DcfPhase,
    pub cw: u32,
    pub retries: u32,
    /// Backoff counter saved when the medium turned busy.
    pub frozen_backoff: Option<u32>,
}

impl DcfState {
    pub fn new(params: &CsmaParams) -> Self {
        DcfState {
            phase: DcfPhase::Idle,
            cw: params.cw_min,
            retries: 0,
            frozen_backoff: None,
        }
    }

    pub fn is_sending_data(&self) -> bool {
        matches!(self.phase, DcfPhase::TxData { .. })
    }
}

/// What the station observes at the start of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DcfInput {
    pub sensed_busy: bool,
    /// Packets queued, including one in service.
    pub backlog: usize,
    /// The receiver finished an ACK for us in the previous slot.
    pub ack_received: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcfEvent {
    None,
    /// First slot of a data frame.
    StartData,
    /// ACK arrived; the head packet is delivered.
    Delivered,
    /// ACK timed out; the packet will be retried.
    Collided,
    /// ACK timed out past `max_retries`; the packet is abandoned.
    Dropped,
}

/// Advances one station by one slot.
pub fn dcf_step<R: Rng + ?Sized>(
    mut st: DcfState,
    input: DcfInput,
    params: &CsmaParams,
    packet_len_slots: u32,
    rng: &mut R,
) -> (DcfState, DcfEvent) {
    let mut event = DcfEvent::None;
    let mut backlog = input.backlog;

    if let DcfPhase::AwaitAck { slots_left } = st.phase {
        if input.ack_received {
            st.cw = params.cw_min;
            st.retries = 0;
            st.phase = DcfPhase::Idle;
            event = DcfEvent::Delivered;
            backlog = backlog.saturating_sub(1);
        } else if slots_left == 0 {
            st.retries += 1;
            st.phase = DcfPhase::Idle;
            if st.retries > params.max_retries {
                st.cw = params.cw_min;
                st.retries = 0;
                event = DcfEvent::Dropped;
                backlog = backlog.saturating_sub(1);
            } else {
                st.cw = (st.cw * 2).min(params.cw_max);
                event = DcfEvent::Collided;
            }
        } else {
            st.phase = DcfPhase::AwaitAck {
                slots_left: slots_left - 1,
            };
            return (st, event);
        }
    }

    if let DcfPhase::TxData { slots_left } = st.phase {
        st.phase = after_data_slot(slots_left, params);
        return (st, event);
    }

    if st.phase == DcfPhase::Idle {
        if backlog == 0 {
            return (st, event);
        }
        st.phase = DcfPhase::Difs {
            slots_left: params.difs_slots,
        };
    }

    match st.phase {
        DcfPhase::Difs { slots_left } => {
            if input.sensed_busy {
                st.phase = DcfPhase::Difs {
                    slots_left: params.difs_slots,
                };
            } else if slots_left <= 1 {
                let counter = st
                    .frozen_backoff
                    .take()
                    .unwrap_or_else(|| rng.random_range(0..st.cw));
                st.phase = DcfPhase::Backoff { counter };
            } else {
                st.phase = DcfPhase::Difs {
                    slots_left: slots_left - 1,
                };
            }
        }
        DcfPhase::Backoff { counter } => {
            if input.sensed_busy {
                st.frozen_backoff = Some(counter);
                st.phase = DcfPhase::Difs {
                    slots_left: params.difs_slots,
                };
            } else if counter == 0 {
                st.phase = after_data_slot(packet_len_slots, params);
                event = DcfEvent::StartData;
            } else {
                st.phase = DcfPhase::Backoff { counter: counter - 1 };
            }
        }
        DcfPhase::Idle | DcfPhase::TxData { .. } | DcfPhase::AwaitAck { .. } => unreachable!(),
    }
    (st, event)
}

fn after_data_slot(slots_left: u32, params: &CsmaParams) -> DcfPhase {
    if slots_left <= 1 {
        DcfPhase::AwaitAck {
            slots_left: params.ack_timeout_slots(),
        }
    } else {
        DcfPhase::TxData {
            slots_left: slots_left - 1,
        }
    }
}

/// Receiver side: SIFS then ACK for every clean data frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponderPhase {
    #[default]
    Idle,
    Sifs { slots_left: u32 },
    SendingAck { slots_left: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ResponderSlot {
    /// The receiver radiates an ACK in this slot.
    pub transmitting: bool,
    /// This was the ACK's last slot.
    pub ack_done: bool,
    /// This was the ACK's first slot.
    pub start_ack: bool,
}

/// Advances a receiver by one slot. `frame_ok` is set on the slot right after
/// a clean data frame ended.
pub fn responder_step(phase: ResponderPhase, frame_ok: bool, params: &CsmaParams) -> (ResponderPhase, ResponderSlot) {
    let phase = match phase {
        ResponderPhase::Idle if frame_ok => ResponderPhase::Sifs {
            slots_left: params.sifs_slots,
        },
        other => other,
    };
    let mut out = ResponderSlot::default();
    let next = match phase {
        ResponderPhase::Idle => ResponderPhase::Idle,
        ResponderPhase::Sifs { slots_left } if slots_left <= 1 => ResponderPhase::SendingAck {
            slots_left: params.ack_slots,
        },
        ResponderPhase::Sifs { slots_left } => ResponderPhase::Sifs {
            slots_left: slots_left - 1,
        },
        ResponderPhase::SendingAck { slots_left } => {
            out.transmitting = true;
            out.start_ack = slots_left == params.ack_slots;
            if slots_left <= 1 {
                out.ack_done = true;
                ResponderPhase::Idle
            } else {
                ResponderPhase::SendingAck {
                    slots_left: slots_left - 1,
                }
            }
        }
    };
    (next, out)
}

/// Busy iff some in-range node other than the listener radiates.
/// Out-of-range (hidden) transmitters go unnoticed.
pub fn carrier_sense(listener: NodeId, active: &[NodeId], links: &LinkTable) -> bool {
    active.iter().any(|&n| links.in_range(listener, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_link_table;
    use crate::config::TopologySpec;
    use crate::node::PairId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn idle(backlog: usize) -> DcfInput {
        DcfInput {
            sensed_busy: false,
            backlog,
            ack_received: false,
        }
    }

    /// Slots from head-of-line until StartData for a lone station, with the
    /// backoff draw pinned.
    fn slots_until_data(draw: u32) -> u32 {
        let params = CsmaParams::default();
        let mut st = DcfState::new(&params);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for slot in 0.. {
            if matches!(st.phase, DcfPhase::Difs { slots_left: 1 }) {
                // force the draw taken at the end of this slot
                st.frozen_backoff = Some(draw);
            }
            let (next, ev) = dcf_step(st, idle(1), &params, 50, &mut rng);
            st = next;
            if ev == DcfEvent::StartData {
                return slot;
            }
        }
        unreachable!()
    }

    #[test]
    fn lone_station_waits_difs_plus_backoff() {
        assert_eq!(slots_until_data(0), 12);
        assert_eq!(slots_until_data(5), 17);
        assert_eq!(slots_until_data(31), 43);
    }

    #[test]
    fn backoff_freezes_on_busy() {
        let params = CsmaParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let st = DcfState {
            phase: DcfPhase::Backoff { counter: 7 },
            ..DcfState::new(&params)
        };
        let busy = DcfInput {
            sensed_busy: true,
            ..idle(1)
        };
        let (st, ev) = dcf_step(st, busy, &params, 50, &mut rng);
        assert_eq!(ev, DcfEvent::None);
        assert_eq!(st.phase, DcfPhase::Difs { slots_left: 12 });
        assert_eq!(st.frozen_backoff, Some(7));
        // the frozen counter comes back after a full idle DIFS
        let mut st = st;
        for _ in 0..12 {
            st = dcf_step(st, idle(1), &params, 50, &mut rng).0;
        }
        assert_eq!(st.phase, DcfPhase::Backoff { counter: 7 });
    }

    #[test]
    fn collision_doubles_window_and_success_resets() {
        let params = CsmaParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut st = DcfState {
            phase: DcfPhase::AwaitAck { slots_left: 0 },
            ..DcfState::new(&params)
        };
        let mut windows = Vec::new();
        for _ in 0..7 {
            let (next, ev) = dcf_step(st, idle(1), &params, 50, &mut rng);
            assert_eq!(ev, DcfEvent::Collided);
            windows.push(next.cw);
            st = DcfState {
                phase: DcfPhase::AwaitAck { slots_left: 0 },
                ..next
            };
        }
        assert_eq!(windows, vec![64, 128, 256, 512, 1024, 1024, 1024]);
        let (next, ev) = dcf_step(st, idle(1), &params, 50, &mut rng);
        assert_eq!(ev, DcfEvent::Dropped);
        assert_eq!(next.cw, 32);
        assert_eq!(next.retries, 0);

        let st = DcfState {
            phase: DcfPhase::AwaitAck { slots_left: 4 },
            cw: 256,
            retries: 3,
            frozen_backoff: None,
        };
        let ack = DcfInput {
            ack_received: true,
            ..idle(1)
        };
        let (next, ev) = dcf_step(st, ack, &params, 50, &mut rng);
        assert_eq!(ev, DcfEvent::Delivered);
        assert_eq!((next.cw, next.retries, next.phase), (32, 0, DcfPhase::Idle));
    }

    #[test]
    fn data_then_ack_timeline() {
        let params = CsmaParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut st = DcfState {
            phase: DcfPhase::Backoff { counter: 0 },
            ..DcfState::new(&params)
        };
        let mut rx = ResponderPhase::Idle;
        let mut ack_prev = false;
        let mut frame_ok = false;
        let mut data_slots = 0;
        for slot in 0..100u32 {
            let was_sending = st.is_sending_data();
            let (next, ev) = dcf_step(
                st,
                DcfInput {
                    ack_received: ack_prev,
                    ..idle(1)
                },
                &params,
                50,
                &mut rng,
            );
            let sent_now = ev == DcfEvent::StartData || was_sending;
            if sent_now {
                data_slots += 1;
            }
            if ev == DcfEvent::Delivered {
                // data 0..50, SIFS 50..58, ACK 58..60
                assert_eq!(slot, 60);
                assert_eq!(data_slots, 50);
                return;
            }
            let (r, out) = responder_step(rx, frame_ok, &params);
            if out.start_ack {
                assert_eq!(slot, 58);
            }
            rx = r;
            ack_prev = out.ack_done;
            frame_ok = sent_now && !next.is_sending_data();
            st = next;
        }
        panic!("never delivered");
    }

    #[test]
    fn sensing_respects_range() {
        let hidden = build_link_table(&TopologySpec::HiddenNode { snr_db: 30.0 }, 2).unwrap();
        let t1 = PairId(0).transmitter();
        let t2 = PairId(1).transmitter();
        assert!(!carrier_sense(t2, &[t1], &hidden));
        let full = build_link_table(&TopologySpec::FullyConnected { snr_db: 30.0 }, 2).unwrap();
        assert!(carrier_sense(t2, &[t1], &full));
        assert!(!carrier_sense(t2, &[], &full));
    }
}
