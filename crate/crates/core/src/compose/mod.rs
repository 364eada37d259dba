//! Sequential composition of heterogeneous models.
//!
//! A [`Workflow`] is a set of model instances whose inputs are bound either
//! to literals or to scalar expressions over other instances' outputs. The
//! composition operator solves instances in dependency order and feeds each
//! solved output into the instances that reference it; exports are evaluated
//! last.

pub mod ast;
mod class;
mod run;
mod validate;

use thiserror::Error;

pub use ast::{
    BayesDef, BinOp, Binding, ClassRef, CtmcDef, EvalError, Export, Expr, Instance, Kind, ModelDef,
    NodeDecl, ParamSpec, RateDecl, StateDecl, Workflow,
};
pub use class::{
    bayes_output_name, builtin_class, model_class, Direction, Formalism, ModelClass, ParamDecl,
    Template, BUILTIN_TEMPLATES,
};
pub use run::{
    instance_network, run_in_order, run_workflow, sweep, ExportValue, ParamPath, Provenance, SolveError, SolveResult,
    SweepRow,
};
pub use validate::{validate_workflow, ValidatedWorkflow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("duplicate {what} name `{name}`")]
    DuplicateName { what: &'static str, name: String },
    #[error("unknown builtin template `{0}`")]
    UnknownTemplate(String),
    #[error("instance `{instance}` uses undefined model `{model}`")]
    UnknownModel { instance: String, model: String },
    #[error("model `{model}`: {reason}")]
    InvalidModel { model: String, reason: String },
    #[error("instance `{instance}` binds `{param}`, which is not an input of `{class}`")]
    UnknownInput {
        instance: String,
        class: String,
        param: String,
    },
    #[error("instance `{instance}` binds `{param}` more than once")]
    DuplicateBinding { instance: String, param: String },
    #[error("instance `{instance}` leaves input `{param}` unbound")]
    UnboundInput { instance: String, param: String },
    #[error("{context} references unknown instance `{instance}`")]
    UnknownInstance { context: String, instance: String },
    #[error("{context} references `{instance}.{output}`, but `{instance}` has no output `{output}`")]
    UnknownOutput {
        context: String,
        instance: String,
        output: String,
    },
    #[error("{context} uses bare name `{param}`; write `instance.output`")]
    FreeParameter { context: String, param: String },
    #[error("{context}: literal is not a finite number")]
    NonFiniteLiteral { context: String },
    #[error("{context} expects a {expected} but is bound to a {found}")]
    KindMismatch {
        context: String,
        expected: Kind,
        found: Kind,
    },
    #[error("{context} mixes a {left} and a {right} in a sum")]
    MixedKinds { context: String, left: Kind, right: Kind },
    #[error("binding cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("cannot substitute `{class}` into `{instance}`: {reason}")]
    IncompatibleSubstitution {
        instance: String,
        class: String,
        reason: String,
    },
    #[error("instance `{instance}` is a `{class}` instance, not a Bayesian network")]
    NotBayes { instance: String, class: String },
    #[error("cannot sweep `{path}`: {reason}")]
    InvalidSweepTarget { path: String, reason: String },
}

/// Anything that can go wrong between a parsed workflow and its results.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComposeError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}
