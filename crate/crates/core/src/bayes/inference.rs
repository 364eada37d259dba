//! Variable elimination with a min-fill ordering.

use std::collections::{BTreeMap, BTreeSet};

use super::factor::Factor;
use super::{BayesError, BayesNet, Distribution, Evidence, Result, VarId};

/// Min-fill elimination order over every variable that is neither queried nor
/// observed. Ties go to the smaller variable id.
pub fn elimination_order(net: &BayesNet, query: &[VarId], evidence: &Evidence) -> Vec<VarId> {
    let mut graph: BTreeMap<VarId, BTreeSet<VarId>> = net
        .variables()
        .iter()
        .filter(|v| !evidence.contains(v.id))
        .map(|v| (v.id, BTreeSet::new()))
        .collect();
    for cpt in net.cpts() {
        let family: Vec<VarId> = cpt
            .parents
            .iter()
            .chain(std::iter::once(&cpt.child))
            .copied()
            .filter(|v| !evidence.contains(*v))
            .collect();
        for (i, &a) in family.iter().enumerate() {
            for &b in &family[i + 1..] {
                graph.get_mut(&a).unwrap().insert(b);
                graph.get_mut(&b).unwrap().insert(a);
            }
        }
    }

    let mut pending: BTreeSet<VarId> = graph.keys().copied().filter(|v| !query.contains(v)).collect();
    let mut order = Vec::with_capacity(pending.len());
    while !pending.is_empty() {
        let mut best: Option<(usize, VarId)> = None;
        for &v in &pending {
            let fill = fill_in(&graph, v);
            if best.is_none_or(|(f, _)| fill < f) {
                best = Some((fill, v));
            }
        }
        let (_, v) = best.expect("pending is non-empty");
        let neighbours = graph.remove(&v).unwrap_or_default();
        for &a in &neighbours {
            let adj = graph.get_mut(&a).unwrap();
            adj.remove(&v);
            adj.extend(neighbours.iter().copied().filter(|&b| b != a));
        }
        pending.remove(&v);
        order.push(v);
    }
    order
}

fn fill_in(graph: &BTreeMap<VarId, BTreeSet<VarId>>, v: VarId) -> usize {
    let nb: Vec<VarId> = graph[&v].iter().copied().collect();
    let mut missing = 0;
    for (i, a) in nb.iter().enumerate() {
        for b in &nb[i + 1..] {
            if !graph[a].contains(b) {
                missing += 1;
            }
        }
    }
    missing
}

/// Exact `P(target | evidence)`.
pub fn marginal(net: &BayesNet, target: VarId, evidence: &Evidence) -> Result<Distribution> {
    let var = net
        .variable(target)
        .ok_or_else(|| BayesError::UnknownVariable(target.to_string()))?;
    let observed = net.resolve_evidence(evidence)?;

    let mut factors: Vec<Factor> = net
        .cpts()
        .iter()
        .map(|cpt| {
            let mut f = Factor::from_cpt(net, cpt);
            for (&v, &s) in &observed {
                if f.contains(v) {
                    f = f.reduce(v, s);
                }
            }
            f
        })
        .collect();

    let query: &[VarId] = if observed.contains_key(&target) { &[] } else { &[target] };
    for v in elimination_order(net, query, evidence) {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.contains(v));
        factors = rest;
        if let Some(prod) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(prod.sum_out(v));
        }
    }
    let result = factors
        .into_iter()
        .reduce(|a, b| a.product(&b))
        .expect("a network has at least the target's factor");

    let card = var.cardinality();
    let mut probs = if let Some(&s) = observed.get(&target) {
        let mut point = vec![0.0; card];
        point[s] = result.values.iter().sum();
        point
    } else {
        debug_assert_eq!(result.vars, vec![target]);
        result.values
    };
    let z: f64 = probs.iter().sum();
    if z.is_nan() || z <= 0.0 {
        return Err(BayesError::ZeroProbabilityEvidence);
    }
    for p in &mut probs {
        *p /= z;
    }
    Ok(Distribution {
        variable: target,
        name: var.name.clone(),
        states: var.states.clone(),
        probs,
    })
}

/// Posterior of every unobserved variable, in id order.
pub fn posterior_report(net: &BayesNet, evidence: &Evidence) -> Result<Vec<Distribution>> {
    net.resolve_evidence(evidence)?;
    let report = net
        .variables()
        .iter()
        .filter(|v| !evidence.contains(v.id))
        .map(|v| marginal(net, v.id, evidence))
        .collect::<Result<Vec<_>>>()?;
    if report.is_empty() {
        if let Some((v, _)) = evidence.iter().next() {
            marginal(net, v, evidence)?;
        }
    }
    Ok(report)
}
