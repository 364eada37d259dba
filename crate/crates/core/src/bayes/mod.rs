//! Finite discrete Bayesian networks and exact inference.
//!
//! A [`BayesNet`] is validated once at construction and never mutated
//! afterwards; every query below is a pure function of the network and the
//! evidence, so a net can be shared freely between threads.
//!
//! CPTs are stored dense. Rows are ordered by the mixed-radix enumeration of
//! the parent states with the *last* parent varying fastest, and each row
//! lists the child's probabilities in state order.

mod factor;
mod inference;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use inference::{elimination_order, marginal, posterior_report};

/// Tolerance applied to CPT row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BayesError {
    #[error("variable id {0} declared more than once")]
    DuplicateVariable(VarId),
    #[error("variable name `{0}` declared more than once")]
    DuplicateName(String),
    #[error("variable `{0}` needs at least two states")]
    TooFewStates(String),
    #[error("variable `{name}` repeats state label `{label}`")]
    DuplicateState { name: String, label: String },
    #[error("no CPT for variable `{0}`")]
    MissingCpt(String),
    #[error("more than one CPT for variable `{0}`")]
    DuplicateCpt(String),
    #[error("CPT given for unknown variable {0}")]
    UnknownCptChild(VarId),
    #[error("`{child}` references unknown parent {parent}")]
    DanglingParent { child: String, parent: VarId },
    #[error("`{child}` lists parent `{parent}` twice")]
    RepeatedParent { child: String, parent: String },
    #[error("CPT of `{child}` has {found} entries, expected {expected}")]
    TableShape {
        child: String,
        found: usize,
        expected: usize,
    },
    #[error("CPT of `{child}` row {row} sums to {sum}, not 1")]
    RowSum { child: String, row: usize, sum: f64 },
    #[error("CPT of `{child}` row {row} has entry {value} outside [0, 1]")]
    EntryRange { child: String, row: usize, value: f64 },
    #[error("parent graph has a cycle through {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{var}` has no state `{state}`")]
    UnknownState { var: String, state: String },
    #[error("assignment does not cover variable `{0}`")]
    IncompleteAssignment(String),
    #[error("evidence has probability zero")]
    ZeroProbabilityEvidence,
}

pub type Result<T, E = BayesError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(id: VarId, name: impl Into<String>, states: impl IntoIterator<Item = S>) -> Self {
        Variable {
            id,
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Conditional probability table of one variable given its parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub child: VarId,
    pub parents: Vec<VarId>,
    pub table: Vec<f64>,
}

impl Cpt {
    pub fn new(child: VarId, parents: Vec<VarId>, table: Vec<f64>) -> Self {
        Cpt {
            child,
            parents,
            table,
        }
    }

    /// A root variable's prior.
    pub fn prior(child: VarId, probs: Vec<f64>) -> Self {
        Cpt::new(child, Vec::new(), probs)
    }
}

/// Observed states, keyed by variable id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence(BTreeMap<VarId, String>);

impl Evidence {
    pub fn new() -> Self {
        Evidence::default()
    }

    pub fn observe(mut self, var: VarId, state: impl Into<String>) -> Self {
        self.0.insert(var, state.into());
        self
    }

    pub fn insert(&mut self, var: VarId, state: impl Into<String>) {
        self.0.insert(var, state.into());
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.0.contains_key(&var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &str)> {
        self.0.iter().map(|(k, v)| (*k, v.as_str()))
    }
}

/// Probability of each state of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub variable: VarId,
    pub name: String,
    pub states: Vec<String>,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn p(&self, state: &str) -> Option<f64> {
        self.states
            .iter()
            .position(|s| s == state)
            .map(|i| self.probs[i])
    }
}

/// Full assignment of state indices, keyed by variable id.
pub type Assignment = BTreeMap<VarId, usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    index: BTreeMap<VarId, usize>,
    topo: Vec<usize>,
}

impl BayesNet {
    /// Validates and assembles a network. Malformed input is rejected, never repaired.
    pub fn new(mut variables: Vec<Variable>, cpts: Vec<Cpt>) -> Result<Self> {
        variables.sort_by_key(|v| v.id);
        let mut index = BTreeMap::new();
        let mut names = BTreeSet::new();
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.id, i).is_some() {
                return Err(BayesError::DuplicateVariable(v.id));
            }
            if !names.insert(v.name.as_str()) {
                return Err(BayesError::DuplicateName(v.name.clone()));
            }
            if v.states.len() < 2 {
                return Err(BayesError::TooFewStates(v.name.clone()));
            }
            let mut seen = BTreeSet::new();
            for s in &v.states {
                if !seen.insert(s.as_str()) {
                    return Err(BayesError::DuplicateState {
                        name: v.name.clone(),
                        label: s.clone(),
                    });
                }
            }
        }

        let mut slots: Vec<Option<Cpt>> = vec![None; variables.len()];
        for cpt in cpts {
            let &i = index
                .get(&cpt.child)
                .ok_or(BayesError::UnknownCptChild(cpt.child))?;
            if slots[i].is_some() {
                return Err(BayesError::DuplicateCpt(variables[i].name.clone()));
            }
            slots[i] = Some(cpt);
        }
        let mut ordered = Vec::with_capacity(variables.len());
        for (i, slot) in slots.into_iter().enumerate() {
            let cpt = slot.ok_or_else(|| BayesError::MissingCpt(variables[i].name.clone()))?;
            check_cpt(&variables, &index, &cpt)?;
            ordered.push(cpt);
        }

        let topo = topological_order(&variables, &index, &ordered)?;
        Ok(BayesNet {
            variables,
            cpts: ordered,
            index,
            topo,
        })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// Variables in id order.
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> Option<&Variable> {
        self.index.get(&id).map(|&i| &self.variables[i])
    }

    pub fn cpt(&self, id: VarId) -> Option<&Cpt> {
        self.index.get(&id).map(|&i| &self.cpts[i])
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().find(|v| v.name == name).map(|v| v.id)
    }

    /// Variable ids in a parents-before-children order.
    pub fn topological_ids(&self) -> Vec<VarId> {
        self.topo.iter().map(|&i| self.variables[i].id).collect()
    }

    /// Builds evidence from `(variable name, state label)` pairs, checking both.
    pub fn evidence<'a>(&self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Evidence> {
        let mut ev = Evidence::new();
        for (name, state) in pairs {
            let id = self
                .var_id(name)
                .ok_or_else(|| BayesError::UnknownVariable(name.to_string()))?;
            ev.insert(id, state);
        }
        self.resolve_evidence(&ev)?;
        Ok(ev)
    }

    pub(crate) fn position(&self, id: VarId) -> usize {
        self.index[&id]
    }

    pub(crate) fn resolve_evidence(&self, evidence: &Evidence) -> Result<BTreeMap<VarId, usize>> {
        let mut out = BTreeMap::new();
        for (id, label) in evidence.iter() {
            let var = self
                .variable(id)
                .ok_or_else(|| BayesError::UnknownVariable(id.to_string()))?;
            let s = var.state_index(label).ok_or_else(|| BayesError::UnknownState {
                var: var.name.clone(),
                state: label.to_string(),
            })?;
            out.insert(id, s);
        }
        Ok(out)
    }
}

fn check_cpt(variables: &[Variable], index: &BTreeMap<VarId, usize>, cpt: &Cpt) -> Result<()> {
    let child = &variables[index[&cpt.child]];
    let mut rows = 1usize;
    let mut seen = BTreeSet::new();
    for p in &cpt.parents {
        let &pi = index.get(p).ok_or(BayesError::DanglingParent {
            child: child.name.clone(),
            parent: *p,
        })?;
        if !seen.insert(*p) || *p == cpt.child {
            return Err(BayesError::RepeatedParent {
                child: child.name.clone(),
                parent: variables[pi].name.clone(),
            });
        }
        rows *= variables[pi].cardinality();
    }
    let card = child.cardinality();
    let expected = rows * card;
    if cpt.table.len() != expected {
        return Err(BayesError::TableShape {
            child: child.name.clone(),
            found: cpt.table.len(),
            expected,
        });
    }
    for (row, chunk) in cpt.table.chunks(card).enumerate() {
        if let Some(&value) = chunk.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(BayesError::EntryRange {
                child: child.name.clone(),
                row,
                value,
            });
        }
        let sum: f64 = chunk.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(BayesError::RowSum {
                child: child.name.clone(),
                row,
                sum,
            });
        }
    }
    Ok(())
}

/// Kahn's algorithm, smallest position first so the result is deterministic.
fn topological_order(
    variables: &[Variable],
    index: &BTreeMap<VarId, usize>,
    cpts: &[Cpt],
) -> Result<Vec<usize>> {
    let n = variables.len();
    let mut indegree = vec![0usize; n];
    let mut children = vec![Vec::new(); n];
    for (i, cpt) in cpts.iter().enumerate() {
        for p in &cpt.parents {
            let pi = index[p];
            children[pi].push(i);
            indegree[i] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    Err(BayesError::Cycle(find_cycle(variables, cpts, &indegree)))
}

/// Walks parent links among the nodes Kahn could not release until a node repeats.
fn find_cycle(variables: &[Variable], cpts: &[Cpt], indegree: &[usize]) -> Vec<String> {
    let index: BTreeMap<VarId, usize> = variables.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
    let start = indegree.iter().position(|&d| d > 0).unwrap_or(0);
    let mut path = vec![start];
    let mut seen = BTreeMap::new();
    seen.insert(start, 0usize);
    let mut cur = start;
    loop {
        let next = cpts[cur]
            .parents
            .iter()
            .map(|p| index[p])
            .find(|&p| indegree[p] > 0);
        let Some(next) = next else { break };
        if let Some(&at) = seen.get(&next) {
            let mut cycle: Vec<String> = path[at..].iter().rev().map(|&i| variables[i].name.clone()).collect();
            cycle.push(cycle[0].clone());
            return cycle;
        }
        seen.insert(next, path.len());
        path.push(next);
        cur = next;
    }
    path.iter().map(|&i| variables[i].name.clone()).collect()
}

/// Probability of a complete assignment: the product of the matching CPT entries.
pub fn joint_probability(net: &BayesNet, assignment: &Assignment) -> Result<f64> {
    let mut p = 1.0;
    for (var, cpt) in net.variables.iter().zip(&net.cpts) {
        let state = *assignment
            .get(&var.id)
            .ok_or_else(|| BayesError::IncompleteAssignment(var.name.clone()))?;
        let mut row = 0usize;
        for parent in &cpt.parents {
            let pv = &net.variables[net.index[parent]];
            let ps = *assignment
                .get(parent)
                .ok_or_else(|| BayesError::IncompleteAssignment(pv.name.clone()))?;
            row = row * pv.cardinality() + ps;
        }
        p *= cpt.table[row * var.cardinality() + state];
    }
    Ok(p)
}

/// Convenience builder that assigns ids in declaration order.
#[derive(Debug, Default)]
pub struct NetBuilder {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
}

impl NetBuilder {
    pub fn new() -> Self {
        NetBuilder::default()
    }

    pub fn variable(&mut self, name: &str, states: &[&str]) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable::new(id, name, states.iter().copied()));
        id
    }

    pub fn cpt(&mut self, child: VarId, parents: &[VarId], table: Vec<f64>) -> &mut Self {
        self.cpts.push(Cpt::new(child, parents.to_vec(), table));
        self
    }

    pub fn build(self) -> Result<BayesNet> {
        BayesNet::new(self.variables, self.cpts)
    }
}
