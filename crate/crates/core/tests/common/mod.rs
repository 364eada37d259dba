#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use redvote::bayes::{self, Assignment, BayesNet, Cpt, Evidence, VarId, Variable};
use redvote::compose::{
    BayesDef, BinOp, Binding, ClassRef, CtmcDef, Export, Expr, Instance, Kind, ModelDef, NodeDecl, ParamSpec,
    RateDecl, StateDecl, Workflow,
};
use redvote::ctmc::{Ctmc, Transition};

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/examples").join(name)
}

/// Random DAG over at most `max_nodes` binary variables, plus random
/// evidence on a subset of them.
pub fn random_net(rng: &mut ChaCha8Rng, max_nodes: usize) -> (BayesNet, Evidence) {
    let n = rng.random_range(1..=max_nodes);
    let variables: Vec<Variable> = (0..n)
        .map(|i| Variable::new(VarId(i), format!("X{i}"), ["t", "f"]))
        .collect();
    let mut cpts = Vec::new();
    for i in 0..n {
        let parents: Vec<VarId> = (0..i).filter(|_| rng.random_bool(0.4)).take(3).map(VarId).collect();
        let rows = 1usize << parents.len();
        let mut table = Vec::with_capacity(rows * 2);
        for _ in 0..rows {
            let p = rng.random_range(0.02..0.98);
            table.extend([p, 1.0 - p]);
        }
        cpts.push(Cpt::new(VarId(i), parents, table));
    }
    let net = BayesNet::new(variables, cpts).expect("random net is valid");
    let mut evidence = Evidence::new();
    for i in 0..n {
        if n > 1 && rng.random_bool(0.3) {
            evidence.insert(VarId(i), if rng.random_bool(0.5) { "t" } else { "f" });
        }
    }
    (net, evidence)
}

/// Posterior of every variable by summing the full joint distribution.
pub fn enumerate_posteriors(net: &BayesNet, evidence: &Evidence) -> Vec<Vec<f64>> {
    let vars = net.variables();
    let cards: Vec<usize> = vars.iter().map(|v| v.cardinality()).collect();
    let observed: Vec<Option<usize>> = vars
        .iter()
        .map(|v| {
            evidence
                .iter()
                .find(|(id, _)| *id == v.id)
                .map(|(_, s)| v.state_index(s).expect("evidence state exists"))
        })
        .collect();
    let mut sums: Vec<Vec<f64>> = cards.iter().map(|&c| vec![0.0; c]).collect();
    let mut idx = vec![0usize; vars.len()];
    loop {
        if idx.iter().zip(&observed).all(|(i, o)| o.is_none_or(|o| o == *i)) {
            let a: Assignment = vars.iter().zip(&idx).map(|(v, &i)| (v.id, i)).collect();
            let p = bayes::joint_probability(net, &a).expect("complete assignment");
            for (k, &i) in idx.iter().enumerate() {
                sums[k][i] += p;
            }
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                let z: f64 = sums[0].iter().sum();
                return sums.into_iter().map(|s| s.into_iter().map(|x| x / z).collect()).collect();
            }
            idx[k] += 1;
            if idx[k] < cards[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Random irreducible chain: a ring plus random chords, rates spread over
/// `[10^-spread, 10^spread]`.
pub fn random_chain(rng: &mut ChaCha8Rng, max_states: usize, spread: f64) -> Ctmc {
    let n = rng.random_range(2..=max_states);
    let rate = |rng: &mut ChaCha8Rng| 10f64.powf(rng.random_range(-spread..=spread));
    let mut transitions = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        transitions.push(Transition { from: i, to: j, rate: rate(rng) });
        for k in 0..n {
            if k != i && k != j && rng.random_bool(0.3) {
                transitions.push(Transition { from: i, to: k, rate: rate(rng) });
            }
        }
    }
    let states = (0..n).map(|i| format!("s{i}")).collect();
    Ctmc::new(states, 0, transitions).expect("random chain is valid")
}

/// Solves `pi Q = 0, sum(pi) = 1` with a dense LU factorisation.
pub fn dense_steady_state(chain: &Ctmc) -> Vec<f64> {
    let n = chain.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for t in chain.transitions() {
        a[(t.to, t.from)] += t.rate;
        a[(t.from, t.from)] -= t.rate;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).expect("irreducible chain gives a regular system").iter().copied().collect()
}

/// Every topological order of a DAG given as dependency sets, up to `limit`.
pub fn topological_orders(deps: &[BTreeSet<usize>], limit: usize) -> Vec<Vec<usize>> {
    fn go(deps: &[BTreeSet<usize>], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if prefix.len() == deps.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..deps.len() {
            if !prefix.contains(&i) && deps[i].iter().all(|d| prefix.contains(d)) {
                prefix.push(i);
                go(deps, prefix, out, limit);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(deps, &mut Vec::new(), &mut out, limit);
    out
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Workflow generator for parse/print round trips.

fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,7}".prop_filter("reserved", |s| s != "builtin")
}

fn names(range: std::ops::Range<usize>) -> impl Strategy<Value = Vec<String>> {
    prop::collection::btree_set(ident(), range).prop_map(|s| s.into_iter().collect())
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL | prop::num::f64::NEGATIVE,
        (-1000i32..1000).prop_map(f64::from),
        (1u32..100_000).prop_map(|m| f64::from(m) * 1e-9),
    ]
    .prop_filter("finite", |x| x.is_finite())
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        number().prop_map(Expr::Num),
        ident().prop_map(Expr::Param),
        (ident(), ident()).prop_map(|(i, o)| Expr::Ref { instance: i, output: o }),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        (
            prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)],
            inner.clone(),
            inner,
        )
            .prop_map(|(op, l, r)| Expr::binary(op, l, r))
    })
}

fn kind() -> impl Strategy<Value = Kind> {
    prop_oneof![Just(Kind::Probability), Just(Kind::Rate), Just(Kind::Ratio)]
}

fn ctmc_def(name: String) -> impl Strategy<Value = ModelDef> {
    (
        names(0..3),
        prop::collection::vec(kind(), 3),
        names(1..5),
        any::<prop::sample::Index>(),
        any::<bool>(),
        prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), expr()), 0..5),
    )
        .prop_map(move |(params, kinds, states, init_at, has_init, rates)| {
            let init = has_init.then(|| init_at.index(states.len()));
            let mut seen = BTreeSet::new();
            let rates = rates
                .into_iter()
                .filter_map(|(a, b, rate)| {
                    let (from, to) = (a.index(states.len()), b.index(states.len()));
                    (from != to && seen.insert((from, to))).then(|| RateDecl {
                        from: states[from].clone(),
                        to: states[to].clone(),
                        rate,
                    })
                })
                .collect();
            ModelDef::Ctmc(CtmcDef {
                name: name.clone(),
                params: params
                    .into_iter()
                    .zip(kinds)
                    .map(|(name, kind)| ParamSpec { name, kind })
                    .collect(),
                states: states
                    .iter()
                    .enumerate()
                    .map(|(i, s)| StateDecl { name: s.clone(), init: init == Some(i) })
                    .collect(),
                rates,
            })
        })
}

fn bayes_def(name: String) -> impl Strategy<Value = ModelDef> {
    prop::collection::vec(
        (names(1..3), prop::collection::vec(ident(), 0..3), prop::collection::vec(number(), 1..5)),
        1..4,
    )
    .prop_flat_map(move |nodes| {
        let name = name.clone();
        names(nodes.len()..nodes.len() + 1).prop_map(move |node_names| {
            ModelDef::Bayes(BayesDef {
                name: name.clone(),
                nodes: node_names
                    .into_iter()
                    .zip(nodes.clone())
                    .map(|(name, (states, parents, cpt))| NodeDecl { name, states, parents, cpt })
                    .collect(),
            })
        })
    })
}

fn instance(name: String) -> impl Strategy<Value = Instance> {
    (
        prop_oneof![ident().prop_map(ClassRef::Builtin), ident().prop_map(ClassRef::Model)],
        names(0..4),
        prop::collection::vec(expr(), 4),
    )
        .prop_map(move |(class, params, values)| Instance {
            name: name.clone(),
            class,
            bindings: params
                .into_iter()
                .zip(values)
                .map(|(param, value)| Binding { param, value })
                .collect(),
        })
}

/// Structurally well-formed workflows: unique names, no self-loops, at most one init state.
pub fn workflow() -> impl Strategy<Value = Workflow> {
    let models = names(0..3).prop_flat_map(|ns| {
        ns.into_iter()
            .map(|n| prop_oneof![ctmc_def(n.clone()), bayes_def(n)].boxed())
            .collect::<Vec<_>>()
    });
    let instances = names(0..4).prop_flat_map(|ns| ns.into_iter().map(instance).collect::<Vec<_>>());
    let exports = (names(0..3), prop::collection::vec(expr(), 3)).prop_map(|(ns, es)| {
        ns.into_iter()
            .zip(es)
            .map(|(name, value)| Export { name, value })
            .collect::<Vec<_>>()
    });
    (any::<String>(), models, instances, exports).prop_map(|(name, models, instances, exports)| Workflow {
        name,
        models,
        instances,
        exports,
    })
}
