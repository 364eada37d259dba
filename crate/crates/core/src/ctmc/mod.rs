//! Labeled continuous-time Markov chains.
//!
//! Rates are events per hour. A chain is validated when built and is
//! immutable afterwards.

mod gth;
mod sim;
mod structure;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gth::{steady_state, StationaryDistribution};
pub use sim::{simulate, Occupancy};
pub use structure::reachable_closed_class;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CtmcError {
    #[error("chain has no states")]
    Empty,
    #[error("state `{0}` declared more than once")]
    DuplicateState(String),
    #[error("initial state index {0} out of range")]
    BadInitial(usize),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("transition index out of range: {0} -> {1}")]
    BadIndex(usize, usize),
    #[error("self-loop transition on `{0}`")]
    SelfLoop(String),
    #[error("duplicate transition `{0}` -> `{1}`")]
    DuplicateTransition(String, String),
    #[error("transition `{from}` -> `{to}` has rate {rate}; rates must be finite and > 0")]
    BadRate { from: String, to: String, rate: f64 },
    #[error("reachable states split into {} closed classes: {}", .0.len(), fmt_classes(.0))]
    MultipleClosedClasses(Vec<Vec<String>>),
    #[error("reachable states {} are transient (probability leaks into a closed class)", .0.join(", "))]
    TransientLeak(Vec<String>),
    #[error("simulation horizon must be finite and > 0, got {0}")]
    BadHorizon(f64),
}

fn fmt_classes(classes: &[Vec<String>]) -> String {
    classes
        .iter()
        .map(|c| format!("{{{}}}", c.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

pub type Result<T, E = CtmcError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ctmc {
    states: Vec<String>,
    initial: usize,
    transitions: Vec<Transition>,
}

impl Ctmc {
    pub fn new(states: Vec<String>, initial: usize, transitions: Vec<Transition>) -> Result<Self> {
        if states.is_empty() {
            return Err(CtmcError::Empty);
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(CtmcError::DuplicateState(s.clone()));
            }
        }
        if initial >= states.len() {
            return Err(CtmcError::BadInitial(initial));
        }
        let mut pairs = BTreeSet::new();
        for t in &transitions {
            if t.from >= states.len() || t.to >= states.len() {
                return Err(CtmcError::BadIndex(t.from, t.to));
            }
            if t.from == t.to {
                return Err(CtmcError::SelfLoop(states[t.from].clone()));
            }
            if !(t.rate.is_finite() && t.rate > 0.0) {
                return Err(CtmcError::BadRate {
                    from: states[t.from].clone(),
                    to: states[t.to].clone(),
                    rate: t.rate,
                });
            }
            if !pairs.insert((t.from, t.to)) {
                return Err(CtmcError::DuplicateTransition(
                    states[t.from].clone(),
                    states[t.to].clone(),
                ));
            }
        }
        Ok(Ctmc {
            states,
            initial,
            transitions,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    /// Rate of `from -> to`, or 0 when there is no such transition.
    pub fn rate(&self, from: &str, to: &str) -> f64 {
        match (self.state_index(from), self.state_index(to)) {
            (Some(i), Some(j)) => self
                .transitions
                .iter()
                .find(|t| t.from == i && t.to == j)
                .map_or(0.0, |t| t.rate),
            _ => 0.0,
        }
    }

    /// Outgoing transitions grouped by source state.
    pub(crate) fn successors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for t in &self.transitions {
            out[t.from].push((t.to, t.rate));
        }
        out
    }

    /// Returns a copy with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Ctmc> {
        let transitions = self
            .transitions
            .iter()
            .map(|t| Transition {
                rate: t.rate * factor,
                ..*t
            })
            .collect();
        Ctmc::new(self.states.clone(), self.initial, transitions)
    }
}

/// Builds a chain from state labels. Zero rates are dropped.
#[derive(Debug, Default)]
pub struct CtmcBuilder {
    states: Vec<String>,
    initial: Option<String>,
    rates: Vec<(String, String, f64)>,
}

impl CtmcBuilder {
    pub fn new() -> Self {
        CtmcBuilder::default()
    }

    pub fn state(mut self, label: &str) -> Self {
        self.states.push(label.to_string());
        self
    }

    pub fn states(mut self, labels: &[&str]) -> Self {
        self.states.extend(labels.iter().map(|s| s.to_string()));
        self
    }

    pub fn initial(mut self, label: &str) -> Self {
        self.initial = Some(label.to_string());
        self
    }

    pub fn rate(mut self, from: &str, to: &str, rate: f64) -> Self {
        self.rates.push((from.to_string(), to.to_string(), rate));
        self
    }

    pub fn build(self) -> Result<Ctmc> {
        let index: BTreeMap<&str, usize> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| CtmcError::UnknownState(s.to_string()));
        let initial = match &self.initial {
            Some(s) => lookup(s)?,
            None => 0,
        };
        let mut transitions = Vec::new();
        for (from, to, rate) in &self.rates {
            let (i, j) = (lookup(from)?, lookup(to)?);
            if *rate == 0.0 {
                continue;
            }
            transitions.push(Transition { from: i, to: j, rate: *rate });
        }
        Ctmc::new(self.states, initial, transitions)
    }
}

/// Dense infinitesimal generator, row-major over the chain's state order.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    n: usize,
    data: Vec<f64>,
}

impl Generator {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `x · Q`.
    pub fn left_multiply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, xi) in x.iter().enumerate() {
            for (o, q) in out.iter_mut().zip(self.row(i)) {
                *o += xi * q;
            }
        }
        out
    }
}

pub fn generator(ctmc: &Ctmc) -> Generator {
    let n = ctmc.len();
    let mut data = vec![0.0; n * n];
    for t in ctmc.transitions() {
        data[t.from * n + t.to] = t.rate;
    }
    for i in 0..n {
        let exit: f64 = (0..n).filter(|&j| j != i).map(|j| data[i * n + j]).sum();
        data[i * n + i] = -exit;
    }
    Generator { n, data }
}
