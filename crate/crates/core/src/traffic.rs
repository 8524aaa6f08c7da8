//! Per-pair packet arrivals and transmit queues.

use std::collections::VecDeque;

use rand::Rng;

/// Bernoulli arrival draw for one slot: 1 with probability `p_slot`.
///
/// At slot granularity this is the Poisson process thinned to at most one
/// arrival per slot.
pub fn sample_arrivals<R: Rng + ?Sized>(p_slot: f64, rng: &mut R) -> u32 {
    u32::from(rng.random_bool(p_slot.clamp(0.0, 1.0)))
}

/// Queue-length priority: `min(queue_len, levels - 1)`; larger wins.
pub fn quantized_queue_priority(queue_len: usize, levels: u32) -> u32 {
    debug_assert!(levels >= 2);
    queue_len.min(levels.saturating_sub(1) as usize) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub arrival_slot: u64,
}

/// FIFO transmit queue with optional tail-drop capacity.
#[derive(Debug, Clone, Default)]
pub struct TxQueue {
    packets: VecDeque<Packet>,
    head_since: Option<u64>,
    cap: Option<usize>,
    arrivals: u64,
    tail_drops: u64,
    departures: u64,
}

impl TxQueue {
    pub fn new(cap: Option<usize>) -> Self {
        TxQueue {
            cap,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn head(&self) -> Option<&Packet> {
        self.packets.front()
    }

    /// Slot at which the current head became head-of-line.
    pub fn head_since(&self) -> Option<u64> {
        self.head_since
    }

    /// Enqueues a packet arriving at `slot`. Returns false on tail drop.
    pub fn offer(&mut self, slot: u64) -> bool {
        if self.cap.is_some_and(|cap| self.packets.len() >= cap) {
            self.tail_drops += 1;
            return false;
        }
        self.arrivals += 1;
        if self.packets.is_empty() {
            self.head_since = Some(slot);
        }
        self.packets.push_back(Packet { arrival_slot: slot });
        true
    }

    /// Removes the head packet (delivered or abandoned); the next packet, if
    /// any, becomes head-of-line at `slot`.
    pub fn pop_head(&mut self, slot: u64) -> Option<Packet> {
        let p = self.packets.pop_front()?;
        self.departures += 1;
        self.head_since = self.packets.front().map(|next| slot.max(next.arrival_slot));
        Some(p)
    }

    /// Accepted arrivals so far.
    pub fn arrivals(&self) -> u64 {
        self.arrivals
    }

    pub fn tail_drops(&self) -> u64 {
        self.tail_drops
    }

    pub fn departures(&self) -> u64 {
        self.departures
    }

    /// Conservation: queued = accepted arrivals - departures.
    pub fn is_conserved(&self) -> bool {
        self.arrivals - self.departures == self.packets.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn empirical(p: f64, slots: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<f64> = (0..slots).map(|_| f64::from(sample_arrivals(p, &mut rng))).collect();
        let mean = draws.iter().sum::<f64>() / slots as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (slots - 1) as f64;
        (mean, var)
    }

    #[test]
    fn low_load_mean_rate() {
        let (mean, var) = empirical(0.2, 1_000_000, 11);
        assert!((mean - 0.2).abs() < 0.002, "{mean}");
        // Bernoulli variance p(1-p); its standard error at 1e6 draws is ~2.6e-4.
        assert!((var - 0.16).abs() < 3.0 * 2.6e-4, "{var}");
    }

    #[test]
    fn high_load_mean_rate() {
        let (mean, var) = empirical(0.8, 1_000_000, 12);
        assert!((mean - 0.8).abs() < 0.002, "{mean}");
        assert!((var - 0.16).abs() < 3.0 * 2.6e-4, "{var}");
    }

    #[test]
    fn saturated_source_arrives_every_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..1000).all(|_| sample_arrivals(1.0, &mut rng) == 1));
    }

    #[test]
    fn queue_priority_clamps() {
        assert_eq!(quantized_queue_priority(0, 8), 0);
        assert_eq!(quantized_queue_priority(100, 8), 7);
        assert_eq!(quantized_queue_priority(3, 8), 3);
    }

    #[test]
    fn head_of_line_tracking() {
        let mut q = TxQueue::new(None);
        assert_eq!(q.head_since(), None);
        q.offer(10);
        q.offer(12);
        assert_eq!(q.head_since(), Some(10));
        q.pop_head(40);
        assert_eq!(q.head_since(), Some(40));
        q.pop_head(90);
        assert_eq!(q.head_since(), None);
        q.offer(95);
        assert_eq!(q.head_since(), Some(95));
    }

    #[test]
    fn tail_drop_at_capacity() {
        let mut q = TxQueue::new(Some(2));
        assert!(q.offer(0));
        assert!(q.offer(1));
        assert!(!q.offer(2));
        assert_eq!(q.len(), 2);
        assert_eq!(q.tail_drops(), 1);
    }

    proptest! {
        #[test]
        fn fifo_and_conservation(ops in proptest::collection::vec(any::<bool>(), 1..200)) {
            let mut q = TxQueue::new(Some(16));
            let mut last_pop = None::<u64>;
            for (slot, push) in ops.into_iter().enumerate() {
                let slot = slot as u64;
                if push {
                    q.offer(slot);
                } else if let Some(p) = q.pop_head(slot) {
                    if let Some(prev) = last_pop {
                        prop_assert!(p.arrival_slot > prev);
                    }
                    last_pop = Some(p.arrival_slot);
                }
                prop_assert!(q.is_conserved());
                if let Some(h) = q.head_since() {
                    prop_assert!(h <= slot);
                    prop_assert!(h >= q.head().unwrap().arrival_slot);
                }
            }
        }
    }
}
