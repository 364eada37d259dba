use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{EvalError, Expr};
use super::class::{bayes_output_name, Formalism, ModelClass, Template};
use super::validate::ValidatedWorkflow;
use super::{ComposeError, ValidationError};
use crate::bayes::{self, BayesError, BayesNet, Evidence};
use crate::ctmc::{self, CtmcError, Ctmc, Transition};
use crate::nmr::{self, FailureParams, MaintenanceParams, ModelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverFailure {
    #[error("input `{param}`: {source}")]
    Input { param: String, source: EvalError },
    #[error("rate `{from}` -> `{to}`: {source}")]
    RateExpr { from: String, to: String, source: EvalError },
    #[error("rate `{from}` -> `{to}` evaluates to {rate}; rates must be >= 0")]
    NegativeRate { from: String, to: String, rate: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bayes(#[from] BayesError),
    #[error(transparent)]
    Ctmc(#[from] CtmcError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("instance `{instance}`: {reason}")]
    Instance { instance: String, reason: SolverFailure },
    #[error("output `{export}`: {reason}")]
    Export { export: String, reason: EvalError },
    #[error("{0:?} is not a topological order of the workflow")]
    BadOrder(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportValue {
    pub name: String,
    pub value: f64,
}

/// Which solver produced an instance's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub instance: String,
    pub class: String,
    pub formalism: Formalism,
    pub solver: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub workflow: String,
    /// Resolved input values per instance, defaults included.
    pub inputs: BTreeMap<String, BTreeMap<String, f64>>,
    /// Output values per instance.
    pub instances: BTreeMap<String, BTreeMap<String, f64>>,
    /// In declaration order.
    pub exports: Vec<ExportValue>,
    /// In instance declaration order, independent of the solve order.
    pub provenance: Vec<Provenance>,
}

impl SolveResult {
    pub fn output(&self, instance: &str, name: &str) -> Option<f64> {
        self.instances.get(instance)?.get(name).copied()
    }

    pub fn export(&self, name: &str) -> Option<f64> {
        self.exports.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

fn failure_params(inputs: &BTreeMap<String, f64>) -> FailureParams {
    let get = |name: &str| inputs[name];
    FailureParams {
        par1: get("PAR_1"),
        par2: get("PAR_2"),
        par3: get("PAR_3"),
        transient_ratio: get("TRANSIENT_RATIO"),
        excl_fail: get("EXCL_FAIL"),
        p_activate: get("P_ACTIVATE"),
        p_miss: get("P_MISS"),
    }
}

fn solve_instance(
    class: &ModelClass,
    inputs: &BTreeMap<String, f64>,
) -> Result<(BTreeMap<String, f64>, String), SolverFailure> {
    let get = |name: &str| inputs[name];
    match &class.template {
        Template::Failure2oo2 => {
            let iv = nmr::failure_interface(&failure_params(inputs))?;
            let outputs = BTreeMap::from([
                ("PAR_4".to_string(), iv.par4.expect("failure interface sets par4")),
                ("PAR_5".to_string(), iv.par5.expect("failure interface sets par5")),
            ]);
            Ok((outputs, "variable elimination (min-fill) on the 2oo2 failure network".to_string()))
        }
        Template::Maintenance(level) => {
            let mut params = MaintenanceParams::new(
                get("PAR_4"),
                get("PAR_5"),
                get("PAR_6"),
                get("PAR_7"),
                get("PAR_8"),
                get("PAR_9"),
            );
            if let Some(&d) = inputs.get("PAR_DIAG") {
                params.diag_fault_rate = d;
            }
            let chain = nmr::build_maintenance_ctmc(*level, &params)?;
            let pi = ctmc::steady_state(&chain)?;
            let iv = nmr::hfr_2oo3_from_maintenance(&pi)?;
            let outputs = BTreeMap::from([("PAR_10".to_string(), iv.par10.expect("hfr sets par10"))]);
            Ok((outputs, format!("GTH steady state of {} ({} states)", class.name, chain.len())))
        }
        Template::Ctmc(def) => {
            let states: Vec<String> = def.states.iter().map(|s| s.name.clone()).collect();
            let index = |s: &str| states.iter().position(|x| x == s).expect("validated state");
            let initial = def.states.iter().position(|s| s.init).expect("validated init");
            let mut transitions = Vec::new();
            for r in &def.rates {
                let rate = r
                    .rate
                    .eval(&|_, _| None, &|p| inputs.get(p).copied())
                    .map_err(|source| SolverFailure::RateExpr {
                        from: r.from.clone(),
                        to: r.to.clone(),
                        source,
                    })?;
                if rate < 0.0 {
                    return Err(SolverFailure::NegativeRate {
                        from: r.from.clone(),
                        to: r.to.clone(),
                        rate,
                    });
                }
                if rate > 0.0 {
                    transitions.push(Transition {
                        from: index(&r.from),
                        to: index(&r.to),
                        rate,
                    });
                }
            }
            let chain = Ctmc::new(states, initial, transitions)?;
            let pi = ctmc::steady_state(&chain)?;
            let outputs = pi.states.iter().cloned().zip(pi.probs.iter().copied()).collect();
            Ok((outputs, format!("GTH steady state of inline chain {} ({} states)", def.name, chain.len())))
        }
        Template::Bayes(net) => {
            let mut outputs = BTreeMap::new();
            for v in net.variables() {
                let d = bayes::marginal(net, v.id, &Evidence::new())?;
                for (s, p) in d.states.iter().zip(&d.probs) {
                    outputs.insert(bayes_output_name(&v.name, s), *p);
                }
            }
            Ok((outputs, format!("variable elimination on inline network {} ({} variables)", class.name, net.len())))
        }
    }
}

/// Solves every instance in the cached topological order, then the exports.
pub fn run_workflow(v: &ValidatedWorkflow) -> Result<SolveResult, SolveError> {
    run_in_order(v, v.order())
}

/// Like [`run_workflow`] with a caller-chosen order, which must be topological.
pub fn run_in_order(v: &ValidatedWorkflow, order: &[usize]) -> Result<SolveResult, SolveError> {
    let w = v.workflow();
    let n = w.instances.len();
    let mut placed = vec![false; n];
    for &i in order {
        if i >= n || placed[i] || v.dependencies(i).iter().any(|&d| !placed[d]) {
            return Err(SolveError::BadOrder(order.to_vec()));
        }
        placed[i] = true;
    }
    if placed.iter().any(|p| !p) {
        return Err(SolveError::BadOrder(order.to_vec()));
    }

    let mut solved: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let mut resolved = BTreeMap::new();
    let mut notes: Vec<Option<Provenance>> = vec![None; n];
    for &i in order {
        let inst = &w.instances[i];
        let class = &v.classes()[i];
        let mut inputs = BTreeMap::new();
        for p in class.inputs() {
            if let Some(d) = p.default {
                inputs.insert(p.name.clone(), d);
            }
        }
        let lookup = |a: &str, b: &str| solved.get(a).and_then(|m| m.get(b)).copied();
        for b in &inst.bindings {
            let x = b
                .value
                .eval(&lookup, &|_| None)
                .map_err(|source| SolveError::Instance {
                    instance: inst.name.clone(),
                    reason: SolverFailure::Input {
                        param: b.param.clone(),
                        source,
                    },
                })?;
            inputs.insert(b.param.clone(), x);
        }
        let (outputs, solver) = solve_instance(class, &inputs).map_err(|reason| SolveError::Instance {
            instance: inst.name.clone(),
            reason,
        })?;
        notes[i] = Some(Provenance {
            instance: inst.name.clone(),
            class: class.name.clone(),
            formalism: class.formalism,
            solver,
        });
        solved.insert(inst.name.clone(), outputs);
        resolved.insert(inst.name.clone(), inputs);
    }

    let lookup = |a: &str, b: &str| solved.get(a).and_then(|m| m.get(b)).copied();
    let exports = w
        .exports
        .iter()
        .map(|e| {
            e.value
                .eval(&lookup, &|_| None)
                .map(|value| ExportValue {
                    name: e.name.clone(),
                    value,
                })
                .map_err(|reason| SolveError::Export {
                    export: e.name.clone(),
                    reason,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(SolveResult {
        workflow: w.name.clone(),
        inputs: resolved,
        instances: solved,
        exports,
        provenance: notes.into_iter().flatten().collect(),
    })
}

/// The network of a Bayesian instance, parameterised with the inputs resolved in `result`.
pub fn instance_network(v: &ValidatedWorkflow, result: &SolveResult, instance: &str) -> Result<BayesNet, ComposeError> {
    let class = v.class_of(instance).ok_or_else(|| ValidationError::UnknownInstance {
        context: "posterior query".to_string(),
        instance: instance.to_string(),
    })?;
    let inputs = result.inputs.get(instance).ok_or_else(|| ValidationError::UnknownInstance {
        context: "solve result".to_string(),
        instance: instance.to_string(),
    })?;
    match &class.template {
        Template::Failure2oo2 => nmr::build_failure_bn(&failure_params(inputs)).map_err(|e| {
            SolveError::Instance {
                instance: instance.to_string(),
                reason: e.into(),
            }
            .into()
        }),
        Template::Bayes(net) => Ok(net.clone()),
        _ => Err(ValidationError::NotBayes {
            instance: instance.to_string(),
            class: class.name.clone(),
        }
        .into()),
    }
}

/// `instance.param`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamPath {
    pub instance: String,
    pub param: String,
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.instance, self.param)
    }
}

impl FromStr for ParamPath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('.') {
            Some((i, p)) if !i.is_empty() && !p.is_empty() && !p.contains('.') => Ok(ParamPath {
                instance: i.to_string(),
                param: p.to_string(),
            }),
            _ => Err(format!("expected `instance.parameter`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub factor: f64,
    pub result: SolveResult,
}

/// One run per multiplier of a literal-bound input, rows in input order.
pub fn sweep(v: &ValidatedWorkflow, path: &ParamPath, factors: &[f64]) -> Result<Vec<SweepRow>, ComposeError> {
    let bad = |reason: String| ValidationError::InvalidSweepTarget {
        path: path.to_string(),
        reason,
    };
    let w = v.workflow();
    let idx = w
        .instances
        .iter()
        .position(|i| i.name == path.instance)
        .ok_or_else(|| bad(format!("no instance `{}`", path.instance)))?;
    if v.classes()[idx].input(&path.param).is_none() {
        return Err(bad(format!("`{}` is not an input of `{}`", path.param, path.instance)).into());
    }
    let base = match w.instances[idx].binding(&path.param) {
        Some(Expr::Num(x)) => *x,
        Some(e) => {
            let refs: BTreeSet<String> = e.refs().iter().map(|(i, o)| format!("{i}.{o}")).collect();
            let reason = if refs.is_empty() {
                "bound to an expression, not a literal".to_string()
            } else {
                format!(
                    "derived from {}; sweep the upstream literal instead",
                    refs.into_iter().collect::<Vec<_>>().join(", ")
                )
            };
            return Err(bad(reason).into());
        }
        None => return Err(bad("not bound to a literal".to_string()).into()),
    };
    if let Some(f) = factors.iter().find(|f| !f.is_finite()) {
        return Err(bad(format!("factor {f} is not finite")).into());
    }
    factors
        .iter()
        .map(|&factor| {
            let varied = v.with_literal(idx, &path.param, base * factor);
            Ok(SweepRow {
                factor,
                result: run_workflow(&varied)?,
            })
        })
        .collect()
}
