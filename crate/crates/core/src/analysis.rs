//! Closed-form access model and its empirical parameter estimates.
//!
//! Node `i` gains access in a cycle with probability
//! `P_i = (1 - p_c) p_s^2 + p_c p_p p_s^2`: either nobody else requests, or
//! others do and `i` holds the highest priority, and in both cases its request
//! and its grant decode. The first-access cycle is then geometric, and the
//! mean access delay is `(1 / P_i - 1) T_s`.

use crate::engine::Trace;
use crate::gsdma::{highest_request, PriorityPolicy};
use crate::node::PairId;

/// Minimum measured cycles [`estimate_params`] accepts.
pub const MIN_CYCLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("{name} = {value} is outside its domain")]
    Domain { name: &'static str, value: f64 },
    #[error("only {cycles} measured cycles, need at least {MIN_CYCLES}")]
    InsufficientData { cycles: usize },
}

/// Inputs of the access model for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessModelParams {
    /// Probability a request or grant message decodes.
    pub p_s: f64,
    /// Probability that more than one transmitter requests in the same cycle.
    pub p_c: f64,
    /// Probability that this node holds the highest priority when it does.
    pub p_p: f64,
    pub t_s_us: f64,
}

fn check_prob(name: &'static str, value: f64) -> Result<f64, AnalysisError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(AnalysisError::Domain { name, value })
    }
}

/// `(1 - p_c) p_s^2 + p_c p_p p_s^2`.
pub fn access_probability(params: &AccessModelParams) -> Result<f64, AnalysisError> {
    let p_s = check_prob("p_s", params.p_s)?;
    let p_c = check_prob("p_c", params.p_c)?;
    let p_p = check_prob("p_p", params.p_p)?;
    Ok((1.0 - p_c) * p_s * p_s + p_c * p_p * p_s * p_s)
}

/// `Pr(first access in cycle k) = (1 - p)^(k-1) p`.
pub fn first_access_pmf(p_access: f64, k: u64) -> Result<f64, AnalysisError> {
    if !(p_access > 0.0 && p_access <= 1.0) {
        return Err(AnalysisError::Domain {
            name: "P_i",
            value: p_access,
        });
    }
    if k < 1 {
        return Err(AnalysisError::Domain {
            name: "k",
            value: k as f64,
        });
    }
    Ok((1.0 - p_access).powf((k - 1) as f64) * p_access)
}

/// Geometric CDF `1 - (1 - p)^k`.
pub fn first_access_cdf(p_access: f64, k: u64) -> Result<f64, AnalysisError> {
    first_access_pmf(p_access, 1)?;
    Ok(1.0 - (1.0 - p_access).powf(k as f64))
}

/// `(E[n_i] - 1) T_s = (1 / P_i - 1) T_s`. A node that never gets access
/// has infinite delay.
pub fn mean_access_delay(p_access: f64, t_s_us: f64) -> Result<f64, AnalysisError> {
    check_prob("P_i", p_access)?;
    if p_access == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 / p_access - 1.0) * t_s_us)
}

/// Estimates per-node model parameters from a traced GSD-MA run.
///
/// For each node, over the measured cycles it requested in: `p_c` is the
/// fraction with at least one other requester and `p_p` the fraction of those
/// in which it held the highest priority. `p_s` is the network-wide control
/// message decode success rate.
pub fn estimate_params(
    trace: &Trace,
    num_pairs: usize,
    policy: &PriorityPolicy,
    t_s_us: f64,
) -> Result<Vec<AccessModelParams>, AnalysisError> {
    let measured: Vec<_> = trace.measured_cycles().collect();
    if measured.len() < MIN_CYCLES {
        return Err(AnalysisError::InsufficientData {
            cycles: measured.len(),
        });
    }
    let (attempts, failures) = measured.iter().fold((0u64, 0u64), |(a, f), c| {
        (a + u64::from(c.decode_attempts), f + u64::from(c.decode_failures))
    });
    let p_s = if attempts == 0 {
        1.0
    } else {
        1.0 - failures as f64 / attempts as f64
    };

    let mut contended = vec![0u64; num_pairs];
    let mut multi = vec![0u64; num_pairs];
    let mut top = vec![0u64; num_pairs];
    for c in &measured {
        let best = highest_request(&c.requests, policy).map(|r| r.tx_id.pair());
        for PairId(i) in c.requesters() {
            contended[i] += 1;
            if c.requests.len() >= 2 {
                multi[i] += 1;
                if best == Some(PairId(i)) {
                    top[i] += 1;
                }
            }
        }
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok((0..num_pairs)
        .map(|i| AccessModelParams {
            p_s,
            p_c: ratio(multi[i], contended[i]),
            p_p: ratio(top[i], multi[i]),
            t_s_us,
        })
        .collect())
}
