use gsdma_core::analysis::{
    access_probability, estimate_params, first_access_cdf, mean_access_delay, AnalysisError,
};
use gsdma_core::config::{validate, ArrivalUnit, ErrorModelSpec, PriorityScheme, ScenarioConfig, TopologySpec};
use gsdma_core::engine::{run_traced, synthetic_first_access, CycleRecord, Trace};
use gsdma_core::gsdma::{PriorityPolicy, RequestMsg};
use gsdma_core::PairId;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ks_distance(p: f64, trials: u64, seed: u64) -> (f64, f64) {
    let sample = synthetic_first_access(p, trials, 20.0, seed);
    let mut d = 0.0f64;
    for k in 1..=sample.max_index() {
        d = d.max((sample.cdf(k) - first_access_cdf(p, k).unwrap()).abs());
    }
    (d, sample.mean_delay_us)
}

#[test]
fn synthetic_first_access_is_geometric() {
    for (i, p) in [0.1, 0.25, 0.5, 0.9].into_iter().enumerate() {
        let (d, mean) = ks_distance(p, 1_000_000, i as u64);
        assert!(d < 0.005, "KS {d} at P={p}");
        let want = mean_access_delay(p, 20.0).unwrap();
        assert!((mean - want).abs() <= 0.01 * want, "mean {mean} vs {want}");
    }
}

fn traced(cfg: ScenarioConfig) -> (gsdma_core::MetricsReport, Trace, PriorityPolicy) {
    let cfg = validate(cfg).unwrap();
    let policy = PriorityPolicy::from_scheme(&cfg.priority_scheme, cfg.num_pairs);
    let (r, t) = run_traced(&cfg).unwrap();
    (r, t, policy)
}

#[test]
fn static_ranks_give_deterministic_priority_wins() {
    let (_, trace, policy) = traced(ScenarioConfig {
        num_pairs: 2,
        arrival_rate: 1.0,
        arrival_unit: ArrivalUnit::Slot,
        priority_scheme: PriorityScheme::StaticUnique { priorities: vec![1, 2] },
        sim_slots: 200_000,
        ..Default::default()
    });
    let est = estimate_params(&trace, 2, &policy, 20.0).unwrap();
    assert_eq!(est[0].p_p, 1.0);
    assert_eq!(est[1].p_p, 0.0);
    assert_eq!(est[0].p_c, 1.0);
}

#[test]
fn lone_pair_never_contends() {
    let (_, trace, policy) = traced(ScenarioConfig {
        num_pairs: 1,
        sim_slots: 400_000,
        arrival_rate: 0.8,
        ..Default::default()
    });
    let est = estimate_params(&trace, 1, &policy, 20.0).unwrap();
    assert_eq!(est[0].p_c, 0.0);
    assert!(est[0].p_s > 0.99);
}

#[test]
fn short_traces_are_rejected() {
    let (_, trace, policy) = traced(ScenarioConfig {
        num_pairs: 1,
        sim_slots: 1_000,
        ..Default::default()
    });
    assert!(matches!(
        estimate_params(&trace, 1, &policy, 20.0),
        Err(AnalysisError::InsufficientData { .. })
    ));
}

#[test]
fn random_priorities_share_wins_evenly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 2..=4usize {
        let mut cycles = Vec::new();
        for c in 0..100_000u64 {
            let mut prio: Vec<u32> = (0..k as u32).collect();
            prio.shuffle(&mut rng);
            cycles.push(CycleRecord {
                start_slot: c * 2,
                len_slots: 2,
                requests: (0..k)
                    .map(|i| RequestMsg {
                        tx_id: PairId(i).transmitter(),
                        priority: prio[i],
                    })
                    .collect(),
                grants: Vec::new(),
                winners: Vec::new(),
                decode_attempts: 0,
                decode_failures: 0,
                measured: true,
            });
        }
        let trace = Trace {
            cycles,
            first_access: vec![Vec::new(); k],
        };
        let policy = PriorityPolicy::QueueLength { levels: 8 };
        let est = estimate_params(&trace, k, &policy, 20.0).unwrap();
        for e in &est {
            assert!((e.p_p - 1.0 / k as f64).abs() < 0.01, "K={k}: {}", e.p_p);
            assert_eq!(e.p_c, 1.0);
        }
        let total: f64 = est.iter().map(|e| e.p_p).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn estimated_model_reproduces_simulated_cycle_delay() {
    for k in 2..=4usize {
        for snr in [30.0, 45.0, 60.0] {
            let (_, trace, policy) = traced(ScenarioConfig {
                num_pairs: k,
                topology: TopologySpec::FullyConnected { snr_db: snr },
                error_model: ErrorModelSpec::default(),
                sim_slots: 1_000_000,
                arrival_rate: 0.6,
                seed: 3,
                ..Default::default()
            });
            let est = estimate_params(&trace, k, &policy, 1.0).unwrap();
            for (i, params) in est.iter().enumerate() {
                let samples = &trace.first_access[i];
                assert!(samples.len() > 500);
                let simulated = samples.iter().map(|&c| f64::from(c - 1)).sum::<f64>() / samples.len() as f64;
                let p = access_probability(params).unwrap();
                let model = mean_access_delay(p, 1.0).unwrap();
                // Compare in cycles; guard tiny delays with an absolute floor.
                let tol = (0.1 * simulated).max(0.02);
                assert!(
                    (model - simulated).abs() <= tol,
                    "K={k} SNR={snr} pair {i}: model {model} vs sim {simulated}"
                );
            }
        }
    }
}
