//! Grassmann–Taksar–Heyman state reduction.
//!
//! GTH only ever adds, multiplies and divides non-negative quantities, so the
//! stationary vector keeps full relative accuracy even when rates span a dozen
//! orders of magnitude (the maintenance chains mix rates of ~3/h with ~1e-13/h).

use serde::{Deserialize, Serialize};

use super::{reachable_closed_class, Ctmc, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub states: Vec<String>,
    pub probs: Vec<f64>,
}

impl StationaryDistribution {
    pub fn get(&self, state: &str) -> Option<f64> {
        self.states
            .iter()
            .position(|s| s == state)
            .map(|i| self.probs[i])
    }
}

/// Stationary distribution on the closed class reachable from the initial
/// state; unreachable states get exactly 0.
pub fn steady_state(ctmc: &Ctmc) -> Result<StationaryDistribution> {
    let members = reachable_closed_class(ctmc)?;
    let m = members.len();
    let mut pos = vec![usize::MAX; ctmc.len()];
    for (k, &s) in members.iter().enumerate() {
        pos[s] = k;
    }
    let mut p = vec![vec![0.0f64; m]; m];
    for t in ctmc.transitions() {
        let (i, j) = (pos[t.from], pos[t.to]);
        if i != usize::MAX && j != usize::MAX {
            p[i][j] = t.rate;
        }
    }

    for k in (1..m).rev() {
        let s: f64 = p[k][..k].iter().sum();
        debug_assert!(s > 0.0, "closed class must be irreducible");
        for row in p.iter_mut().take(k) {
            row[k] /= s;
        }
        let (head, tail) = p.split_at_mut(k);
        let pk = &tail[0][..k];
        for (i, row) in head.iter_mut().enumerate() {
            let pik = row[k];
            if pik == 0.0 {
                continue;
            }
            for (j, (x, &y)) in row[..k].iter_mut().zip(pk).enumerate() {
                if j != i {
                    *x += pik * y;
                }
            }
        }
    }

    let mut x = vec![0.0; m];
    x[0] = 1.0;
    for k in 1..m {
        x[k] = (0..k).map(|i| x[i] * p[i][k]).sum();
    }
    let total: f64 = x.iter().sum();

    let mut probs = vec![0.0; ctmc.len()];
    for (k, &s) in members.iter().enumerate() {
        probs[s] = x[k] / total;
    }
    Ok(StationaryDistribution {
        states: ctmc.states().to_vec(),
        probs,
    })
}
