use std::fmt::Write;

use crate::compose::{ClassRef, Expr, ModelDef, Workflow};

const INDENT: &str = "  ";

/// Shortest text that parses back to exactly `x`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (x.fract() == 0.0 && a < 1e15) || (1e-4..1e6).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0, false);
    out
}

fn write_expr(out: &mut String, e: &Expr, parent: u8, right: bool) {
    match e {
        Expr::Num(x) => out.push_str(&format_number(*x)),
        Expr::Param(p) => out.push_str(p),
        Expr::Ref { instance, output } => {
            let _ = write!(out, "{instance}.{output}");
        }
        Expr::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let paren = p < parent || (right && p == parent);
            if paren {
                out.push('(');
            }
            write_expr(out, lhs, p, false);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, rhs, p, true);
            if paren {
                out.push(')');
            }
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical text: models, then instances, then outputs, each in declaration order.
pub fn print(w: &Workflow) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "workflow {} {{", quote(&w.name));
    let mut first = true;
    let mut section = |out: &mut String| {
        if !first {
            out.push('\n');
        }
        first = false;
    };
    for m in &w.models {
        section(&mut out);
        match m {
            ModelDef::Ctmc(c) => {
                let _ = writeln!(out, "{INDENT}ctmc {} {{", c.name);
                for p in &c.params {
                    let _ = writeln!(out, "{INDENT}{INDENT}param {} : {};", p.name, p.kind);
                }
                for s in &c.states {
                    let init = if s.init { " init" } else { "" };
                    let _ = writeln!(out, "{INDENT}{INDENT}state {}{init};", s.name);
                }
                for r in &c.rates {
                    let _ = writeln!(out, "{INDENT}{INDENT}rate {} -> {} : {};", r.from, r.to, print_expr(&r.rate));
                }
            }
            ModelDef::Bayes(b) => {
                let _ = writeln!(out, "{INDENT}bayes {} {{", b.name);
                for n in &b.nodes {
                    let _ = write!(out, "{INDENT}{INDENT}node {} states ({})", n.name, n.states.join(", "));
                    if !n.parents.is_empty() {
                        let _ = write!(out, " parents ({})", n.parents.join(", "));
                    }
                    let cpt: Vec<String> = n.cpt.iter().map(|&x| format_number(x)).collect();
                    let _ = writeln!(out, " cpt ({});", cpt.join(", "));
                }
            }
        }
        let _ = writeln!(out, "{INDENT}}}");
    }
    for i in &w.instances {
        section(&mut out);
        let class = match &i.class {
            ClassRef::Builtin(t) => format!("builtin.{t}"),
            ClassRef::Model(m) => m.clone(),
        };
        let _ = writeln!(out, "{INDENT}instance {} : {class} {{", i.name);
        for b in &i.bindings {
            let _ = writeln!(out, "{INDENT}{INDENT}{} = {};", b.param, print_expr(&b.value));
        }
        let _ = writeln!(out, "{INDENT}}}");
    }
    if !w.exports.is_empty() {
        section(&mut out);
    }
    for e in &w.exports {
        let _ = writeln!(out, "{INDENT}output {} = {};", e.name, print_expr(&e.value));
    }
    out.push_str("}\n");
    out
}
