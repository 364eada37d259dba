//! Single-trajectory Monte Carlo simulation, used as an oracle for the solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Ctmc, CtmcError, Result};

/// Number of equal-time batches used for the batch-means standard error.
pub const BATCHES: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    pub states: Vec<String>,
    /// Fraction of the horizon spent in each state.
    pub fractions: Vec<f64>,
    /// Batch-means standard error of each fraction.
    pub std_errors: Vec<f64>,
    pub jumps: u64,
}

/// Simulates one trajectory from the initial state up to `horizon` hours.
/// The result is fully determined by `seed`.
pub fn simulate(ctmc: &Ctmc, horizon: f64, seed: u64) -> Result<Occupancy> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(CtmcError::BadHorizon(horizon));
    }
    let n = ctmc.len();
    let succ = ctmc.successors();
    let exit: Vec<f64> = succ.iter().map(|s| s.iter().map(|(_, r)| r).sum()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let batch_len = horizon / BATCHES as f64;
    let mut batch_time = vec![vec![0.0f64; n]; BATCHES];
    let mut state = ctmc.initial();
    let mut now = 0.0f64;
    let mut jumps = 0u64;

    while now < horizon {
        let dwell = if exit[state] > 0.0 {
            let u: f64 = rng.random();
            -(1.0 - u).ln() / exit[state]
        } else {
            f64::INFINITY
        };
        let end = (now + dwell).min(horizon);
        spread(&mut batch_time, state, now, end, batch_len);
        now = end;
        if now >= horizon {
            break;
        }
        let mut target = rng.random::<f64>() * exit[state];
        let mut next = succ[state].last().map(|&(j, _)| j).unwrap_or(state);
        for &(j, r) in &succ[state] {
            if target < r {
                next = j;
                break;
            }
            target -= r;
        }
        state = next;
        jumps += 1;
    }

    let mut fractions = vec![0.0; n];
    let mut std_errors = vec![0.0; n];
    for s in 0..n {
        let per_batch: Vec<f64> = batch_time.iter().map(|b| b[s] / batch_len).collect();
        let mean = per_batch.iter().sum::<f64>() / BATCHES as f64;
        let var = per_batch.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        fractions[s] = mean;
        std_errors[s] = (var / BATCHES as f64).sqrt();
    }
    Ok(Occupancy {
        states: ctmc.states().to_vec(),
        fractions,
        std_errors,
        jumps,
    })
}

/// Credits the interval `[start, end)` in `state` to the batches it overlaps.
fn spread(batch_time: &mut [Vec<f64>], state: usize, start: f64, end: f64, batch_len: f64) {
    let last = batch_time.len() - 1;
    let mut b = ((start / batch_len) as usize).min(last);
    let mut t = start;
    while t < end {
        let edge = if b == last { end } else { ((b + 1) as f64 * batch_len).min(end) };
        if edge > t {
            batch_time[b][state] += edge - t;
            t = edge;
        }
        if t < end {
            b += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctmc::CtmcBuilder;

    fn two_state() -> Ctmc {
        CtmcBuilder::new()
            .states(&["S0", "S1"])
            .rate("S0", "S1", 2.0)
            .rate("S1", "S0", 6.0)
            .build()
            .unwrap()
    }

    #[test]
    fn same_seed_same_result() {
        let c = two_state();
        assert_eq!(simulate(&c, 1e3, 7).unwrap(), simulate(&c, 1e3, 7).unwrap());
        assert_ne!(simulate(&c, 1e3, 7).unwrap(), simulate(&c, 1e3, 8).unwrap());
    }

    #[test]
    fn two_state_within_three_sigma() {
        let occ = simulate(&two_state(), 1e5, 2024).unwrap();
        for (f, (se, expect)) in occ.fractions.iter().zip(occ.std_errors.iter().zip([0.75, 0.25])) {
            assert!((f - expect).abs() <= 3.0 * se, "{f} vs {expect} (se {se})");
        }
        let total: f64 = occ.fractions.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn absorbing_state_holds_until_horizon() {
        let c = CtmcBuilder::new().states(&["A", "B"]).build().unwrap();
        let occ = simulate(&c, 10.0, 1).unwrap();
        assert_eq!(occ.fractions[0], 1.0);
        assert_eq!(occ.jumps, 0);
    }

    #[test]
    fn rejects_bad_horizon() {
        assert!(simulate(&two_state(), 0.0, 1).is_err());
        assert!(simulate(&two_state(), f64::INFINITY, 1).is_err());
    }
}
