use crate::config::{Protocol, ValidatedConfig};
use crate::node::PairId;
use crate::stats::Running;

/// Counted slots of one pair: `n` data, `k` waiting, `m` error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SlotCounts {
    pub n: u64,
    pub k: u64,
    pub m: u64,
}

impl SlotCounts {
    pub fn total(&self) -> u64 {
        self.n + self.k + self.m
    }

    /// `n / (n + k + m)`, absent when nothing was counted.
    pub fn efficiency(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.n as f64 / total as f64)
    }

    fn add(&mut self, class: SlotClass, count: u64) {
        match class {
            SlotClass::Data => self.n += count,
            SlotClass::Waiting => self.k += count,
            SlotClass::Error => self.m += count,
        }
    }
}

impl std::ops::AddAssign for SlotCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.n += rhs.n;
        self.k += rhs.k;
        self.m += rhs.m;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotClass {
    Data,
    Waiting,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairMetrics {
    pub pair: PairId,
    pub counts: SlotCounts,
    pub efficiency: Option<f64>,
    /// Batch-means 95% half-width.
    pub efficiency_ci95: Option<f64>,
    pub mean_access_delay_us: Option<f64>,
    pub delay_ci95_us: Option<f64>,
    pub delay_samples: u64,
    pub packets_served: u64,
    /// Retry-limit drops plus tail drops.
    pub packets_dropped: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMetrics {
    pub counts: SlotCounts,
    /// Mean over pairs with a defined efficiency.
    pub efficiency: Option<f64>,
    pub efficiency_ci95: Option<f64>,
    /// Mean over pairs with delay samples.
    pub mean_access_delay_us: Option<f64>,
    pub delay_ci95_us: Option<f64>,
    pub packets_served: u64,
    pub packets_dropped: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub protocol: Protocol,
    pub num_pairs: usize,
    pub topology: &'static str,
    pub snr_db: Option<f64>,
    pub arrival_rate: f64,
    pub seed: u64,
    pub sim_slots: u64,
    pub warmup_slots: u64,
    pub per_pair: Vec<PairMetrics>,
    pub aggregate: AggregateMetrics,
}

#[derive(Debug, Clone, Default)]
struct PairAccounting {
    totals: SlotCounts,
    batches: Vec<SlotCounts>,
    delays: Running,
    served: u64,
    dropped: u64,
}

/// Collects n/k/m slots, delays and batch splits after warmup.
#[derive(Debug, Clone)]
pub(crate) struct Accounting {
    warmup: u64,
    sim_slots: u64,
    slot_time_us: f64,
    pairs: Vec<PairAccounting>,
}

impl Accounting {
    pub fn new(cfg: &ValidatedConfig) -> Self {
        let pair = PairAccounting {
            batches: vec![SlotCounts::default(); cfg.batches],
            ..Default::default()
        };
        Accounting {
            warmup: cfg.warmup_slots(),
            sim_slots: cfg.sim_slots,
            slot_time_us: cfg.slot_time_us,
            pairs: vec![pair; cfg.num_pairs],
        }
    }

    pub fn measured(&self, slot: u64) -> bool {
        slot >= self.warmup && slot < self.sim_slots
    }

    fn batch_of(&self, slot: u64) -> usize {
        let batches = self.pairs.first().map_or(1, |p| p.batches.len()) as u64;
        let span = self.sim_slots - self.warmup;
        (((slot - self.warmup) * batches) / span).min(batches - 1) as usize
    }

    /// Books `count` slots of `class` for `pair`, dated at `slot`.
    pub fn add(&mut self, pair: PairId, slot: u64, class: SlotClass, count: u64) {
        if count == 0 || !self.measured(slot) {
            return;
        }
        let b = self.batch_of(slot);
        let acc = &mut self.pairs[pair.0];
        acc.totals.add(class, count);
        acc.batches[b].add(class, count);
    }

    pub fn delay_slots(&mut self, pair: PairId, data_start: u64, reference: u64) {
        if !self.measured(data_start) {
            return;
        }
        debug_assert!(data_start >= reference);
        let us = (data_start - reference) as f64 * self.slot_time_us;
        self.pairs[pair.0].delays.push(us);
    }

    pub fn served(&mut self, pair: PairId, slot: u64) {
        if self.measured(slot) {
            self.pairs[pair.0].served += 1;
        }
    }

    pub fn dropped(&mut self, pair: PairId, slot: u64) {
        if self.measured(slot) {
            self.pairs[pair.0].dropped += 1;
        }
    }

    pub fn finish(self, cfg: &ValidatedConfig) -> MetricsReport {
        let per_pair: Vec<PairMetrics> = self
            .pairs
            .iter()
            .enumerate()
            .map(|(i, acc)| PairMetrics {
                pair: PairId(i),
                counts: acc.totals,
                efficiency: acc.totals.efficiency(),
                efficiency_ci95: acc
                    .batches
                    .iter()
                    .filter_map(SlotCounts::efficiency)
                    .collect::<Running>()
                    .ci95(),
                mean_access_delay_us: acc.delays.mean(),
                delay_ci95_us: acc.delays.ci95(),
                delay_samples: acc.delays.count(),
                packets_served: acc.served,
                packets_dropped: acc.dropped,
            })
            .collect();

        let mut counts = SlotCounts::default();
        for p in &per_pair {
            counts += p.counts;
        }
        let efficiency = per_pair.iter().filter_map(|p| p.efficiency).collect::<Running>().mean();
        let batches = self.pairs.first().map_or(0, |p| p.batches.len());
        let efficiency_ci95 = (0..batches)
            .filter_map(|b| {
                self.pairs
                    .iter()
                    .filter_map(|p| p.batches[b].efficiency())
                    .collect::<Running>()
                    .mean()
            })
            .collect::<Running>()
            .ci95();
        let with_delay: Vec<&PairMetrics> = per_pair.iter().filter(|p| p.mean_access_delay_us.is_some()).collect();
        let mean_access_delay_us = with_delay
            .iter()
            .filter_map(|p| p.mean_access_delay_us)
            .collect::<Running>()
            .mean();
        let delay_ci95_us = (!with_delay.is_empty()).then(|| {
            let sq: f64 = with_delay.iter().map(|p| p.delay_ci95_us.unwrap_or(0.0).powi(2)).sum();
            sq.sqrt() / with_delay.len() as f64
        });
        let aggregate = AggregateMetrics {
            counts,
            efficiency,
            efficiency_ci95,
            mean_access_delay_us,
            delay_ci95_us,
            packets_served: per_pair.iter().map(|p| p.packets_served).sum(),
            packets_dropped: per_pair.iter().map(|p| p.packets_dropped).sum(),
        };
        MetricsReport {
            protocol: cfg.protocol,
            num_pairs: cfg.num_pairs,
            topology: cfg.topology.kind_name(),
            snr_db: cfg.topology.snr_db(),
            arrival_rate: cfg.arrival_rate,
            seed: cfg.seed,
            sim_slots: cfg.sim_slots,
            warmup_slots: cfg.warmup_slots(),
            per_pair,
            aggregate,
        }
    }
}
