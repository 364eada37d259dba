//! Abstract form of a workflow, as written in a model file or built in code.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Probability,
    Rate,
    Ratio,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Probability => "probability",
            Kind::Rate => "rate",
            Kind::Ratio => "ratio",
        })
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "probability" => Ok(Kind::Probability),
            "rate" => Ok(Kind::Rate),
            "ratio" => Ok(Kind::Ratio),
            other => Err(format!("unknown parameter kind `{other}` (expected probability, rate or ratio)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Scalar expression over literals, class parameters and instance outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    /// A parameter of the enclosing model definition (inline CTMC rates only).
    Param(String),
    /// `instance.output`
    Ref { instance: String, output: String },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("expression evaluates to a non-finite value")]
    NonFinite,
    #[error("no value for `{0}`")]
    Unresolved(String),
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn reference(instance: &str, output: &str) -> Expr {
        Expr::Ref {
            instance: instance.to_string(),
            output: output.to_string(),
        }
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Every `instance.output` reference, left to right.
    pub fn refs(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Ref { instance, output } = e {
                out.push((instance.as_str(), output.as_str()));
            }
        });
        out
    }

    pub fn params(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                out.push(p.as_str());
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        if let Expr::Binary { lhs, rhs, .. } = self {
            lhs.walk(f);
            rhs.walk(f);
        }
    }

    pub fn eval(
        &self,
        refs: &dyn Fn(&str, &str) -> Option<f64>,
        params: &dyn Fn(&str) -> Option<f64>,
    ) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(x) => *x,
            Expr::Param(p) => params(p).ok_or_else(|| EvalError::Unresolved(p.clone()))?,
            Expr::Ref { instance, output } => {
                refs(instance, output).ok_or_else(|| EvalError::Unresolved(format!("{instance}.{output}")))?
            }
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval(refs, params)?;
                let b = rhs.eval(refs, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluates an expression made of literals only.
    pub fn eval_const(&self) -> Result<f64, EvalError> {
        self.eval(&|_, _| None, &|_| None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDecl {
    pub name: String,
    pub init: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDecl {
    pub from: String,
    pub to: String,
    pub rate: Expr,
}

/// Inline CTMC model definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtmcDef {
    pub name: String,
    pub params: Vec<ParamSpec>,
    pub states: Vec<StateDecl>,
    pub rates: Vec<RateDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDecl {
    pub name: String,
    pub states: Vec<String>,
    pub parents: Vec<String>,
    pub cpt: Vec<f64>,
}

/// Inline Bayesian network definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesDef {
    pub name: String,
    pub nodes: Vec<NodeDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelDef {
    Ctmc(CtmcDef),
    Bayes(BayesDef),
}

impl ModelDef {
    pub fn name(&self) -> &str {
        match self {
            ModelDef::Ctmc(c) => &c.name,
            ModelDef::Bayes(b) => &b.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassRef {
    /// `builtin.<template>`
    Builtin(String),
    /// A model defined in the same workflow.
    Model(String),
}

impl fmt::Display for ClassRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassRef::Builtin(n) => write!(f, "builtin.{n}"),
            ClassRef::Model(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub param: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub class: ClassRef,
    pub bindings: Vec<Binding>,
}

impl Instance {
    pub fn new(name: &str, class: ClassRef) -> Self {
        Instance {
            name: name.to_string(),
            class,
            bindings: Vec::new(),
        }
    }

    pub fn bind(mut self, param: &str, value: Expr) -> Self {
        self.bindings.push(Binding {
            param: param.to_string(),
            value,
        });
        self
    }

    pub fn binding(&self, param: &str) -> Option<&Expr> {
        self.bindings.iter().find(|b| b.param == param).map(|b| &b.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Export {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workflow {
    pub name: String,
    pub models: Vec<ModelDef>,
    pub instances: Vec<Instance>,
    pub exports: Vec<Export>,
}

impl Workflow {
    pub fn new(name: &str) -> Self {
        Workflow {
            name: name.to_string(),
            models: Vec::new(),
            instances: Vec::new(),
            exports: Vec::new(),
        }
    }

    pub fn with_instance(mut self, instance: Instance) -> Self {
        self.instances.push(instance);
        self
    }

    pub fn with_export(mut self, name: &str, value: Expr) -> Self {
        self.exports.push(Export {
            name: name.to_string(),
            value,
        });
        self
    }

    pub fn with_model(mut self, model: ModelDef) -> Self {
        self.models.push(model);
        self
    }

    pub fn instance(&self, name: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.name == name)
    }

    pub fn instance_mut(&mut self, name: &str) -> Option<&mut Instance> {
        self.instances.iter_mut().find(|i| i.name == name)
    }
}
