//! Winners picked by the simulator against an exhaustive, independent
//! evaluation of the priority order.

use gsdma_core::config::{validate, ErrorModelSpec, PriorityScheme, ScenarioConfig};
use gsdma_core::engine::run_traced;
use gsdma_core::gsdma::RequestMsg;
use gsdma_core::PairId;

fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Rank 1 is best; ranks are unique, so no tie-break is needed.
fn static_winner(requests: &[RequestMsg], ranks: &[u32]) -> Option<PairId> {
    requests
        .iter()
        .map(|r| r.tx_id.pair())
        .min_by_key(|p| ranks[p.0])
}

/// Largest value wins, then the lowest pair index.
fn queue_winner(requests: &[RequestMsg]) -> Option<PairId> {
    let best = requests.iter().map(|r| r.priority).max()?;
    requests
        .iter()
        .filter(|r| r.priority == best)
        .map(|r| r.tx_id.pair())
        .min_by_key(|p| p.0)
}

#[test]
fn static_priority_winner_is_the_best_rank_for_every_permutation() {
    for k in 2..=4usize {
        let base: Vec<u32> = (1..=k as u32).collect();
        for ranks in permutations(&base) {
            let cfg = validate(ScenarioConfig {
                num_pairs: k,
                arrival_rate: 0.7,
                priority_scheme: PriorityScheme::StaticUnique {
                    priorities: ranks.clone(),
                },
                error_model: ErrorModelSpec::Fixed { p_err: 0.0 },
                sim_slots: 60_000,
                seed: 7,
                ..Default::default()
            })
            .unwrap();
            let (_, trace) = run_traced(&cfg).unwrap();
            let mut contested = 0;
            for c in &trace.cycles {
                if c.requests.len() > 1 {
                    contested += 1;
                }
                let expected: Vec<PairId> = static_winner(&c.requests, &ranks).into_iter().collect();
                assert_eq!(c.winners, expected, "ranks {ranks:?} at slot {}", c.start_slot);
            }
            assert!(contested > 50, "too few contested cycles for {ranks:?}");
        }
    }
}

#[test]
fn queue_length_winner_matches_exhaustive_order() {
    for k in 2..=4usize {
        let cfg = validate(ScenarioConfig {
            num_pairs: k,
            arrival_rate: 0.9,
            error_model: ErrorModelSpec::Fixed { p_err: 0.0 },
            sim_slots: 200_000,
            seed: 11,
            ..Default::default()
        })
        .unwrap();
        let (_, trace) = run_traced(&cfg).unwrap();
        let mut ties = 0;
        for c in &trace.cycles {
            let top = c.requests.iter().map(|r| r.priority).max();
            if c.requests.iter().filter(|r| Some(r.priority) == top).count() > 1 {
                ties += 1;
            }
            let expected: Vec<PairId> = queue_winner(&c.requests).into_iter().collect();
            assert_eq!(c.winners, expected);
        }
        assert!(ties > 0, "no priority ties exercised at K={k}");
    }
}
