//! Model classes: a template plus its typed interface.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ast::{BayesDef, CtmcDef, Kind, ModelDef};
use super::ValidationError;
use crate::bayes::{BayesNet, Cpt, VarId, Variable};
use crate::nmr::{
    MaintenanceLevel, TEMPLATE_FAILURE_2OO2, TEMPLATE_MAINTENANCE_4, TEMPLATE_MAINTENANCE_5,
    TEMPLATE_MAINTENANCE_8,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Formalism {
    Bayes,
    Ctmc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDecl {
    pub name: String,
    pub direction: Direction,
    pub kind: Kind,
    /// Inputs with a default may be left unbound.
    pub default: Option<f64>,
}

impl ParamDecl {
    fn input(name: &str, kind: Kind) -> Self {
        ParamDecl {
            name: name.to_string(),
            direction: Direction::Input,
            kind,
            default: None,
        }
    }

    fn optional(name: &str, kind: Kind, default: f64) -> Self {
        ParamDecl {
            default: Some(default),
            ..ParamDecl::input(name, kind)
        }
    }

    fn output(name: &str, kind: Kind) -> Self {
        ParamDecl {
            direction: Direction::Output,
            ..ParamDecl::input(name, kind)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Template {
    Failure2oo2,
    Maintenance(MaintenanceLevel),
    Ctmc(CtmcDef),
    Bayes(BayesNet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelClass {
    pub name: String,
    pub formalism: Formalism,
    pub params: Vec<ParamDecl>,
    pub template: Template,
}

impl ModelClass {
    pub fn inputs(&self) -> impl Iterator<Item = &ParamDecl> {
        self.params.iter().filter(|p| p.direction == Direction::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &ParamDecl> {
        self.params.iter().filter(|p| p.direction == Direction::Output)
    }

    pub fn input(&self, name: &str) -> Option<&ParamDecl> {
        self.inputs().find(|p| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&ParamDecl> {
        self.outputs().find(|p| p.name == name)
    }

    /// Output names and kinds, the part of the interface downstream models see.
    pub fn output_interface(&self) -> Vec<(&str, Kind)> {
        let mut v: Vec<(&str, Kind)> = self.outputs().map(|p| (p.name.as_str(), p.kind)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }
}

pub const BUILTIN_TEMPLATES: [&str; 4] = [
    TEMPLATE_FAILURE_2OO2,
    TEMPLATE_MAINTENANCE_4,
    TEMPLATE_MAINTENANCE_5,
    TEMPLATE_MAINTENANCE_8,
];

/// The registered builtin classes, looked up by template name.
pub fn builtin_class(name: &str) -> Option<ModelClass> {
    use Kind::*;
    let maintenance = |level: MaintenanceLevel| {
        let mut params = vec![
            ParamDecl::input("PAR_4", Probability),
            ParamDecl::input("PAR_5", Probability),
            ParamDecl::input("PAR_6", Rate),
            ParamDecl::input("PAR_7", Ratio),
            ParamDecl::input("PAR_8", Rate),
            ParamDecl::input("PAR_9", Rate),
        ];
        if level == MaintenanceLevel::EightState {
            params.push(ParamDecl::optional("PAR_DIAG", Rate, 0.0));
        }
        params.push(ParamDecl::output("PAR_10", Probability));
        ModelClass {
            name: level.template_name().to_string(),
            formalism: Formalism::Ctmc,
            params,
            template: Template::Maintenance(level),
        }
    };
    match name {
        TEMPLATE_FAILURE_2OO2 => {
            use crate::nmr::FailureParams as F;
            Some(ModelClass {
                name: name.to_string(),
                formalism: Formalism::Bayes,
                params: vec![
                    ParamDecl::input("PAR_1", Probability),
                    ParamDecl::input("PAR_2", Ratio),
                    ParamDecl::input("PAR_3", Probability),
                    ParamDecl::optional("TRANSIENT_RATIO", Ratio, F::DEFAULT_TRANSIENT_RATIO),
                    ParamDecl::optional("EXCL_FAIL", Probability, F::DEFAULT_EXCL_FAIL),
                    ParamDecl::optional("P_ACTIVATE", Probability, F::DEFAULT_P_ACTIVATE),
                    ParamDecl::optional("P_MISS", Probability, F::DEFAULT_P_MISS),
                    ParamDecl::output("PAR_4", Probability),
                    ParamDecl::output("PAR_5", Probability),
                ],
                template: Template::Failure2oo2,
            })
        }
        TEMPLATE_MAINTENANCE_4 => Some(maintenance(MaintenanceLevel::FourState)),
        TEMPLATE_MAINTENANCE_5 => Some(maintenance(MaintenanceLevel::FiveState)),
        TEMPLATE_MAINTENANCE_8 => Some(maintenance(MaintenanceLevel::EightState)),
        _ => None,
    }
}

fn invalid(model: &str, reason: impl Into<String>) -> ValidationError {
    ValidationError::InvalidModel {
        model: model.to_string(),
        reason: reason.into(),
    }
}

fn unique<'a>(model: &str, what: &str, names: impl IntoIterator<Item = &'a str>) -> Result<(), ValidationError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(invalid(model, format!("duplicate {what} `{n}`")));
        }
    }
    Ok(())
}

/// Resolves an inline model definition into a class, checking its structure.
pub fn model_class(def: &ModelDef) -> Result<ModelClass, ValidationError> {
    match def {
        ModelDef::Ctmc(c) => ctmc_class(c),
        ModelDef::Bayes(b) => bayes_class(b),
    }
}

fn ctmc_class(def: &CtmcDef) -> Result<ModelClass, ValidationError> {
    let name = def.name.as_str();
    unique(name, "parameter", def.params.iter().map(|p| p.name.as_str()))?;
    unique(name, "state", def.states.iter().map(|s| s.name.as_str()))?;
    if def.states.is_empty() {
        return Err(invalid(name, "no states declared"));
    }
    let inits = def.states.iter().filter(|s| s.init).count();
    if inits != 1 {
        return Err(invalid(name, format!("exactly one `init` state required, found {inits}")));
    }
    let mut pairs = BTreeSet::new();
    for r in &def.rates {
        for s in [&r.from, &r.to] {
            if !def.states.iter().any(|d| &d.name == s) {
                return Err(invalid(name, format!("rate uses undeclared state `{s}`")));
            }
        }
        if r.from == r.to {
            return Err(invalid(name, format!("self-loop transition on `{}`", r.from)));
        }
        if !pairs.insert((r.from.as_str(), r.to.as_str())) {
            return Err(invalid(name, format!("duplicate transition `{}` -> `{}`", r.from, r.to)));
        }
        if let Some((i, o)) = r.rate.refs().first() {
            return Err(invalid(name, format!("rate expressions cannot reference `{i}.{o}`; bind it to a parameter")));
        }
        for p in r.rate.params() {
            if !def.params.iter().any(|d| d.name == p) {
                return Err(invalid(name, format!("rate uses undeclared parameter `{p}`")));
            }
        }
    }
    let mut params: Vec<ParamDecl> = def.params.iter().map(|p| ParamDecl::input(&p.name, p.kind)).collect();
    for s in &def.states {
        if params.iter().any(|p| p.name == s.name) {
            return Err(invalid(name, format!("state `{}` clashes with a parameter name", s.name)));
        }
        params.push(ParamDecl::output(&s.name, Kind::Probability));
    }
    Ok(ModelClass {
        name: name.to_string(),
        formalism: Formalism::Ctmc,
        params,
        template: Template::Ctmc(def.clone()),
    })
}

/// Output name for the marginal of `node` being in `state`.
pub fn bayes_output_name(node: &str, state: &str) -> String {
    format!("{node}_{state}")
}

fn bayes_class(def: &BayesDef) -> Result<ModelClass, ValidationError> {
    let name = def.name.as_str();
    unique(name, "node", def.nodes.iter().map(|n| n.name.as_str()))?;
    let ids = |node: &str| def.nodes.iter().position(|n| n.name == node).map(VarId);
    let mut variables = Vec::new();
    let mut cpts = Vec::new();
    for (i, n) in def.nodes.iter().enumerate() {
        variables.push(Variable::new(VarId(i), &n.name, n.states.iter().cloned()));
        let parents = n
            .parents
            .iter()
            .map(|p| ids(p).ok_or_else(|| invalid(name, format!("node `{}` has unknown parent `{p}`", n.name))))
            .collect::<Result<Vec<_>, _>>()?;
        cpts.push(Cpt::new(VarId(i), parents, n.cpt.clone()));
    }
    let net = BayesNet::new(variables, cpts).map_err(|e| invalid(name, e.to_string()))?;
    let mut params = Vec::new();
    let mut seen = BTreeSet::new();
    for n in &def.nodes {
        for s in &n.states {
            let out = bayes_output_name(&n.name, s);
            if !seen.insert(out.clone()) {
                return Err(invalid(name, format!("output name `{out}` is ambiguous")));
            }
            params.push(ParamDecl::output(&out, Kind::Probability));
        }
    }
    Ok(ModelClass {
        name: name.to_string(),
        formalism: Formalism::Bayes,
        params,
        template: Template::Bayes(net),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::ast::{Expr, NodeDecl, ParamSpec, RateDecl, StateDecl};

    #[test]
    fn builtins_are_registered() {
        for name in BUILTIN_TEMPLATES {
            let c = builtin_class(name).unwrap();
            assert_eq!(c.name, name);
        }
        assert!(builtin_class("failure2oo3").is_none());
        let f = builtin_class("failure2oo2").unwrap();
        assert_eq!(f.formalism, Formalism::Bayes);
        assert_eq!(f.output_interface(), vec![("PAR_4", Kind::Probability), ("PAR_5", Kind::Probability)]);
    }

    #[test]
    fn maintenance_classes_share_interface() {
        let four = builtin_class("maintenance4").unwrap();
        let five = builtin_class("maintenance5").unwrap();
        let eight = builtin_class("maintenance8").unwrap();
        assert_eq!(four.output_interface(), five.output_interface());
        assert_eq!(five.output_interface(), eight.output_interface());
    }

    fn two_state() -> CtmcDef {
        CtmcDef {
            name: "M".into(),
            params: vec![ParamSpec {
                name: "lam".into(),
                kind: Kind::Rate,
            }],
            states: vec![
                StateDecl {
                    name: "Up".into(),
                    init: true,
                },
                StateDecl {
                    name: "Down".into(),
                    init: false,
                },
            ],
            rates: vec![
                RateDecl {
                    from: "Up".into(),
                    to: "Down".into(),
                    rate: Expr::param("lam"),
                },
                RateDecl {
                    from: "Down".into(),
                    to: "Up".into(),
                    rate: Expr::num(1.0),
                },
            ],
        }
    }

    #[test]
    fn inline_ctmc_class() {
        let c = model_class(&ModelDef::Ctmc(two_state())).unwrap();
        assert_eq!(c.inputs().count(), 1);
        assert_eq!(c.outputs().map(|p| p.name.as_str()).collect::<Vec<_>>(), ["Up", "Down"]);
    }

    #[test]
    fn inline_ctmc_errors() {
        let mut d = two_state();
        d.rates[0].to = "Up".into();
        assert!(matches!(model_class(&ModelDef::Ctmc(d)), Err(ValidationError::InvalidModel { .. })));
        let mut d = two_state();
        d.states[1].init = true;
        assert!(model_class(&ModelDef::Ctmc(d)).is_err());
        let mut d = two_state();
        d.rates[0].rate = Expr::param("mu");
        assert!(model_class(&ModelDef::Ctmc(d)).is_err());
        let mut d = two_state();
        d.rates[0].rate = Expr::reference("phi", "PAR_4");
        assert!(model_class(&ModelDef::Ctmc(d)).is_err());
    }

    #[test]
    fn inline_bayes_class() {
        let def = BayesDef {
            name: "N".into(),
            nodes: vec![
                NodeDecl {
                    name: "Rain".into(),
                    states: vec!["yes".into(), "no".into()],
                    parents: vec![],
                    cpt: vec![0.2, 0.8],
                },
                NodeDecl {
                    name: "Wet".into(),
                    states: vec!["yes".into(), "no".into()],
                    parents: vec!["Rain".into()],
                    cpt: vec![0.9, 0.1, 0.1, 0.9],
                },
            ],
        };
        let c = model_class(&ModelDef::Bayes(def.clone())).unwrap();
        assert!(c.output("Wet_yes").is_some());
        let mut bad = def;
        bad.nodes[1].cpt = vec![0.9, 0.2, 0.1, 0.9];
        assert!(model_class(&ModelDef::Bayes(bad)).is_err());
    }
}
