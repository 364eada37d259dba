use std::collections::VecDeque;

use super::{Ctmc, CtmcError, Result};

fn reach_from(succ: &[Vec<(usize, f64)>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for &(j, _) in &succ[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}

/// States reachable from the initial state, in state order.
///
/// The reachable set must be a single closed communicating class: every
/// reachable state has to lead back to the initial state. Unreachable states
/// are simply left out.
pub fn reachable_closed_class(ctmc: &Ctmc) -> Result<Vec<usize>> {
    let succ = ctmc.successors();
    let n = ctmc.len();
    let reach: Vec<Vec<bool>> = (0..n).map(|i| reach_from(&succ, i)).collect();
    let members: Vec<usize> = (0..n).filter(|&j| reach[ctmc.initial()][j]).collect();
    if members.iter().all(|&j| reach[j][ctmc.initial()]) {
        return Ok(members);
    }

    // Closed classes inside the reachable set: states that can reach back
    // everything they can reach.
    let mut assigned = vec![false; n];
    let mut closed: Vec<Vec<String>> = Vec::new();
    let mut in_closed = vec![false; n];
    for &i in &members {
        if assigned[i] {
            continue;
        }
        let class: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&j| reach[i][j] && reach[j][i])
            .collect();
        for &j in &class {
            assigned[j] = true;
        }
        let is_closed = (0..n).all(|j| !reach[i][j] || reach[j][i]);
        if is_closed {
            for &j in &class {
                in_closed[j] = true;
            }
            closed.push(class.iter().map(|&j| ctmc.states()[j].clone()).collect());
        }
    }
    if closed.len() > 1 {
        return Err(CtmcError::MultipleClosedClasses(closed));
    }
    let transient = members
        .iter()
        .filter(|&&j| !in_closed[j])
        .map(|&j| ctmc.states()[j].clone())
        .collect();
    Err(CtmcError::TransientLeak(transient))
}
