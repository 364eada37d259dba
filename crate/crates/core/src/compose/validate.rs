use std::collections::{BTreeMap, BTreeSet};

use super::ast::{BinOp, ClassRef, Expr, Kind, Workflow};
use super::class::{builtin_class, model_class, ModelClass};
use super::ValidationError;

/// A workflow whose invariants have been checked, with its classes resolved
/// and a topological solve order cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedWorkflow {
    workflow: Workflow,
    classes: Vec<ModelClass>,
    order: Vec<usize>,
}

impl ValidatedWorkflow {
    pub fn workflow(&self) -> &Workflow {
        &self.workflow
    }

    /// Resolved class of each instance, parallel to `workflow().instances`.
    pub fn classes(&self) -> &[ModelClass] {
        &self.classes
    }

    pub fn class_of(&self, instance: &str) -> Option<&ModelClass> {
        let i = self.workflow.instances.iter().position(|x| x.name == instance)?;
        Some(&self.classes[i])
    }

    /// Instance indices in solve order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn order_names(&self) -> Vec<&str> {
        self.order
            .iter()
            .map(|&i| self.workflow.instances[i].name.as_str())
            .collect()
    }

    /// Indices of the instances that instance `i` reads from.
    pub fn dependencies(&self, i: usize) -> BTreeSet<usize> {
        dependencies(&self.workflow, i)
    }

    /// Swaps the class of one instance for another class exposing the same
    /// output interface. Only the swapped instance's bindings are rechecked;
    /// downstream instances see the same outputs and are left alone.
    pub fn substitute_class(&self, instance: &str, class: ClassRef) -> Result<ValidatedWorkflow, ValidationError> {
        let idx = self
            .workflow
            .instances
            .iter()
            .position(|x| x.name == instance)
            .ok_or_else(|| ValidationError::UnknownInstance {
                context: "substitution".to_string(),
                instance: instance.to_string(),
            })?;
        let models = resolve_models(&self.workflow)?;
        let new_class = resolve_class(&models, instance, &class)?;
        let old = &self.classes[idx];
        if new_class.output_interface() != old.output_interface() {
            return Err(ValidationError::IncompatibleSubstitution {
                instance: instance.to_string(),
                class: class.to_string(),
                reason: format!(
                    "outputs {:?} differ from {:?}",
                    new_class.output_interface(),
                    old.output_interface()
                ),
            });
        }
        let mut workflow = self.workflow.clone();
        workflow.instances[idx].class = class;
        let mut classes = self.classes.clone();
        classes[idx] = new_class;
        check_bindings(&workflow, &classes, idx)?;
        Ok(ValidatedWorkflow {
            workflow,
            classes,
            order: self.order.clone(),
        })
    }

    /// Replaces one binding with a literal. The dependency structure can only
    /// shrink, so the cached order stays valid.
    pub(crate) fn with_literal(&self, instance: usize, param: &str, value: f64) -> ValidatedWorkflow {
        let mut next = self.clone();
        for b in &mut next.workflow.instances[instance].bindings {
            if b.param == param {
                b.value = Expr::Num(value);
            }
        }
        next
    }
}

fn dependencies(w: &Workflow, i: usize) -> BTreeSet<usize> {
    w.instances[i]
        .bindings
        .iter()
        .flat_map(|b| b.value.refs())
        .filter_map(|(inst, _)| w.instances.iter().position(|x| x.name == inst))
        .collect()
}

fn check_unique<'a>(what: &'static str, names: impl IntoIterator<Item = &'a str>) -> Result<(), ValidationError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ValidationError::DuplicateName {
                what,
                name: n.to_string(),
            });
        }
    }
    Ok(())
}

fn resolve_models(w: &Workflow) -> Result<BTreeMap<&str, ModelClass>, ValidationError> {
    w.models
        .iter()
        .map(|m| Ok((m.name(), model_class(m)?)))
        .collect()
}

fn resolve_class(
    models: &BTreeMap<&str, ModelClass>,
    instance: &str,
    class: &ClassRef,
) -> Result<ModelClass, ValidationError> {
    match class {
        ClassRef::Builtin(name) => builtin_class(name).ok_or_else(|| ValidationError::UnknownTemplate(name.clone())),
        ClassRef::Model(name) => models
            .get(name.as_str())
            .cloned()
            .ok_or_else(|| ValidationError::UnknownModel {
                instance: instance.to_string(),
                model: name.clone(),
            }),
    }
}

/// Checks literals, bare names and references of one expression.
fn check_expr(w: &Workflow, classes: &[ModelClass], context: &str, e: &Expr) -> Result<(), ValidationError> {
    if let Some(p) = e.params().first() {
        return Err(ValidationError::FreeParameter {
            context: context.to_string(),
            param: p.to_string(),
        });
    }
    check_literals(context, e)?;
    for (inst, out) in e.refs() {
        let idx = w
            .instances
            .iter()
            .position(|x| x.name == inst)
            .ok_or_else(|| ValidationError::UnknownInstance {
                context: context.to_string(),
                instance: inst.to_string(),
            })?;
        if classes[idx].output(out).is_none() {
            return Err(ValidationError::UnknownOutput {
                context: context.to_string(),
                instance: inst.to_string(),
                output: out.to_string(),
            });
        }
    }
    Ok(())
}

fn check_literals(context: &str, e: &Expr) -> Result<(), ValidationError> {
    match e {
        Expr::Num(x) if !x.is_finite() => Err(ValidationError::NonFiniteLiteral {
            context: context.to_string(),
        }),
        Expr::Binary { lhs, rhs, .. } => {
            check_literals(context, lhs)?;
            check_literals(context, rhs)
        }
        _ => Ok(()),
    }
}

/// Kind of an expression: literals are untyped, sums need matching kinds,
/// and scaling by an untyped factor keeps the kind.
fn infer_kind(
    w: &Workflow,
    classes: &[ModelClass],
    context: &str,
    e: &Expr,
) -> Result<Option<Kind>, ValidationError> {
    Ok(match e {
        Expr::Num(_) | Expr::Param(_) => None,
        Expr::Ref { instance, output } => w
            .instances
            .iter()
            .position(|x| &x.name == instance)
            .and_then(|i| classes[i].output(output))
            .map(|p| p.kind),
        Expr::Binary { op, lhs, rhs } => {
            let l = infer_kind(w, classes, context, lhs)?;
            let r = infer_kind(w, classes, context, rhs)?;
            match (op, l, r) {
                (BinOp::Add | BinOp::Sub, Some(a), Some(b)) if a != b => {
                    return Err(ValidationError::MixedKinds {
                        context: context.to_string(),
                        left: a,
                        right: b,
                    })
                }
                (BinOp::Add | BinOp::Sub, a, b) => a.or(b),
                (BinOp::Mul | BinOp::Div, Some(_), Some(_)) => None,
                (BinOp::Mul | BinOp::Div, a, b) => a.or(b),
            }
        }
    })
}

fn check_bindings(w: &Workflow, classes: &[ModelClass], idx: usize) -> Result<(), ValidationError> {
    let inst = &w.instances[idx];
    let class = &classes[idx];
    let mut bound = BTreeSet::new();
    for b in &inst.bindings {
        let decl = class.input(&b.param).ok_or_else(|| ValidationError::UnknownInput {
            instance: inst.name.clone(),
            class: class.name.clone(),
            param: b.param.clone(),
        })?;
        if !bound.insert(b.param.as_str()) {
            return Err(ValidationError::DuplicateBinding {
                instance: inst.name.clone(),
                param: b.param.clone(),
            });
        }
        let context = format!("{}.{}", inst.name, b.param);
        check_expr(w, classes, &context, &b.value)?;
        if let Some(found) = infer_kind(w, classes, &context, &b.value)? {
            if found != decl.kind {
                return Err(ValidationError::KindMismatch {
                    context,
                    expected: decl.kind,
                    found,
                });
            }
        }
    }
    for p in class.inputs() {
        if p.default.is_none() && !bound.contains(p.name.as_str()) {
            return Err(ValidationError::UnboundInput {
                instance: inst.name.clone(),
                param: p.name.clone(),
            });
        }
    }
    Ok(())
}

fn find_cycle(w: &Workflow) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(w: &Workflow, i: usize, marks: &mut [Mark], stack: &mut Vec<usize>) -> Option<Vec<String>> {
        marks[i] = Mark::Active;
        stack.push(i);
        for d in dependencies(w, i) {
            match marks[d] {
                Mark::Active => {
                    let at = stack.iter().position(|&x| x == d).unwrap();
                    let mut path: Vec<String> = stack[at..].iter().map(|&x| w.instances[x].name.clone()).collect();
                    path.push(w.instances[d].name.clone());
                    return Some(path);
                }
                Mark::New => {
                    if let Some(p) = visit(w, d, marks, stack) {
                        return Some(p);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks[i] = Mark::Done;
        None
    }
    let mut marks = vec![Mark::New; w.instances.len()];
    for i in 0..w.instances.len() {
        if marks[i] == Mark::New {
            if let Some(p) = visit(w, i, &mut marks, &mut Vec::new()) {
                return Some(p);
            }
        }
    }
    None
}

/// Kahn's algorithm; among ready instances the earliest declared goes first.
fn topological_order(w: &Workflow) -> Vec<usize> {
    let n = w.instances.len();
    let deps: Vec<BTreeSet<usize>> = (0..n).map(|i| dependencies(w, i)).collect();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n)
            .find(|&i| !done[i] && deps[i].iter().all(|&d| done[d]))
            .expect("acyclic");
        done[next] = true;
        order.push(next);
    }
    order
}

pub fn validate_workflow(w: &Workflow) -> Result<ValidatedWorkflow, ValidationError> {
    check_unique("model", w.models.iter().map(|m| m.name()))?;
    check_unique("instance", w.instances.iter().map(|i| i.name.as_str()))?;
    check_unique("output", w.exports.iter().map(|e| e.name.as_str()))?;

    let models = resolve_models(w)?;
    let classes = w
        .instances
        .iter()
        .map(|i| resolve_class(&models, &i.name, &i.class))
        .collect::<Result<Vec<_>, _>>()?;

    for idx in 0..w.instances.len() {
        check_bindings(w, &classes, idx)?;
    }
    for e in &w.exports {
        check_expr(w, &classes, &format!("output `{}`", e.name), &e.value)?;
    }
    if let Some(cycle) = find_cycle(w) {
        return Err(ValidationError::Cycle(cycle));
    }
    let order = topological_order(w);
    Ok(ValidatedWorkflow {
        workflow: w.clone(),
        classes,
        order,
    })
}
