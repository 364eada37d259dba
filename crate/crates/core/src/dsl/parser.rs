use std::collections::BTreeMap;

use super::lexer::{tokenize, Tok, Token};
use super::{Diagnostic, Pos, SourceFile};
use crate::compose::{
    BayesDef, BinOp, Binding, ClassRef, CtmcDef, Export, Expr, Instance, Kind, ModelDef, NodeDecl, ParamSpec,
    RateDecl, StateDecl, Workflow,
};

pub fn parse(source: &SourceFile) -> Result<Workflow, Vec<Diagnostic>> {
    let (tokens, mut diags) = tokenize(&source.text);
    if diags.is_empty() {
        let mut p = Parser {
            tokens,
            at: 0,
            diags: Vec::new(),
        };
        match p.file() {
            Ok(w) if p.diags.is_empty() => return Ok(w),
            Ok(_) => {}
            Err(d) => p.diags.push(d),
        }
        diags = p.diags;
    }
    Err(diags.into_iter().map(|d| d.with_origin(&source.origin)).collect())
}

/// Tracks first-seen positions so a repeated name is reported where it recurs.
struct Names<'a> {
    what: &'a str,
    seen: BTreeMap<String, Pos>,
}

impl<'a> Names<'a> {
    fn new(what: &'a str) -> Self {
        Names {
            what,
            seen: BTreeMap::new(),
        }
    }

    fn add(&mut self, name: &str, pos: Pos, diags: &mut Vec<Diagnostic>) {
        if let Some(first) = self.seen.get(name) {
            diags.push(Diagnostic::error(
                format!("duplicate {} name `{name}` (first declared at {first})", self.what),
                pos,
            ));
        } else {
            self.seen.insert(name.to_string(), pos);
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    diags: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            format!("expected {expected}, found {}", self.peek().describe()),
            self.pos(),
        )
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.next().pos)
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_keyword(kw) {
            Ok(self.next().pos)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.next().pos)),
            _ => Err(self.unexpected(what)),
        }
    }

    fn file(&mut self) -> PResult<Workflow> {
        if self.is_keyword("version") {
            self.next();
            let pos = self.pos();
            match self.next().tok {
                Tok::Number(1.0) => {}
                Tok::Number(v) => return Err(Diagnostic::error(format!("unsupported format version {v}"), pos)),
                other => {
                    return Err(Diagnostic::error(
                        format!("expected version number, found {}", other.describe()),
                        pos,
                    ))
                }
            }
            self.expect(Tok::Semi, "`;`")?;
        }
        self.keyword("workflow")?;
        let name = match self.next() {
            Token { tok: Tok::Str(s), .. } => s,
            t => {
                return Err(Diagnostic::error(
                    format!("expected workflow name string, found {}", t.tok.describe()),
                    t.pos,
                ))
            }
        };
        self.expect(Tok::LBrace, "`{`")?;
        let mut w = Workflow::new(&name);
        let mut instances = Names::new("instance");
        let mut models = Names::new("model");
        let mut exports = Names::new("output");
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Ident(kw) if kw == "instance" => {
                    let inst = self.instance()?;
                    instances.add(&inst.name, pos, &mut self.diags);
                    w.instances.push(inst);
                }
                Tok::Ident(kw) if kw == "output" => {
                    self.next();
                    let (name, _) = self.ident("output name")?;
                    self.expect(Tok::Eq, "`=`")?;
                    let value = self.expr()?;
                    self.expect(Tok::Semi, "`;`")?;
                    exports.add(&name, pos, &mut self.diags);
                    w.exports.push(Export { name, value });
                }
                Tok::Ident(kw) if kw == "ctmc" => {
                    let def = self.ctmc()?;
                    self.check_model_name(&def.name, pos);
                    models.add(&def.name, pos, &mut self.diags);
                    w.models.push(ModelDef::Ctmc(def));
                }
                Tok::Ident(kw) if kw == "bayes" => {
                    let def = self.bayes()?;
                    self.check_model_name(&def.name, pos);
                    models.add(&def.name, pos, &mut self.diags);
                    w.models.push(ModelDef::Bayes(def));
                }
                _ => return Err(self.unexpected("`instance`, `output`, `ctmc`, `bayes` or `}`")),
            }
        }
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of file"));
        }
        Ok(w)
    }

    fn check_model_name(&mut self, name: &str, pos: Pos) {
        if name == "builtin" {
            self.diags
                .push(Diagnostic::error("`builtin` is reserved and cannot name a model", pos));
        }
    }

    fn instance(&mut self) -> PResult<Instance> {
        self.keyword("instance")?;
        let (name, _) = self.ident("instance name")?;
        self.expect(Tok::Colon, "`:`")?;
        let class = if self.is_keyword("builtin") {
            self.next();
            self.expect(Tok::Dot, "`.`")?;
            ClassRef::Builtin(self.ident("template name")?.0)
        } else {
            ClassRef::Model(self.ident("model name")?.0)
        };
        self.expect(Tok::LBrace, "`{`")?;
        let mut inst = Instance::new(&name, class);
        let mut params = Names::new("binding");
        while *self.peek() != Tok::RBrace {
            let (param, pos) = self.ident("parameter name or `}`")?;
            self.expect(Tok::Eq, "`=`")?;
            let value = self.expr()?;
            self.expect(Tok::Semi, "`;`")?;
            params.add(&param, pos, &mut self.diags);
            inst.bindings.push(Binding { param, value });
        }
        self.next();
        Ok(inst)
    }

    fn ctmc(&mut self) -> PResult<CtmcDef> {
        self.keyword("ctmc")?;
        let (name, _) = self.ident("model name")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut def = CtmcDef {
            name,
            params: Vec::new(),
            states: Vec::new(),
            rates: Vec::new(),
        };
        let mut params = Names::new("parameter");
        let mut states = Names::new("state");
        let mut init: Option<Pos> = None;
        let mut pairs: BTreeMap<(String, String), Pos> = BTreeMap::new();
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Ident(kw) if kw == "param" => {
                    self.next();
                    let (pname, _) = self.ident("parameter name")?;
                    self.expect(Tok::Colon, "`:`")?;
                    let (kind_name, kpos) = self.ident("parameter kind")?;
                    let kind: Kind = kind_name.parse().map_err(|m| Diagnostic::error(m, kpos))?;
                    self.expect(Tok::Semi, "`;`")?;
                    params.add(&pname, pos, &mut self.diags);
                    def.params.push(ParamSpec { name: pname, kind });
                }
                Tok::Ident(kw) if kw == "state" => {
                    self.next();
                    let (sname, _) = self.ident("state name")?;
                    let is_init = self.is_keyword("init");
                    if is_init {
                        let ipos = self.next().pos;
                        if let Some(first) = init {
                            self.diags.push(Diagnostic::error(
                                format!("multiple `init` states (first at {first})"),
                                ipos,
                            ));
                        }
                        init.get_or_insert(ipos);
                    }
                    self.expect(Tok::Semi, "`;`")?;
                    states.add(&sname, pos, &mut self.diags);
                    def.states.push(StateDecl {
                        name: sname,
                        init: is_init,
                    });
                }
                Tok::Ident(kw) if kw == "rate" => {
                    self.next();
                    let (from, _) = self.ident("source state")?;
                    self.expect(Tok::Arrow, "`->`")?;
                    let (to, _) = self.ident("target state")?;
                    self.expect(Tok::Colon, "`:`")?;
                    let rate = self.expr()?;
                    self.expect(Tok::Semi, "`;`")?;
                    if from == to {
                        self.diags
                            .push(Diagnostic::error(format!("self-loop transition on `{from}`"), pos));
                    } else if let Some(first) = pairs.get(&(from.clone(), to.clone())) {
                        self.diags.push(Diagnostic::error(
                            format!("duplicate transition `{from}` -> `{to}` (first at {first})"),
                            pos,
                        ));
                    } else {
                        pairs.insert((from.clone(), to.clone()), pos);
                    }
                    def.rates.push(RateDecl { from, to, rate });
                }
                _ => return Err(self.unexpected("`param`, `state`, `rate` or `}`")),
            }
        }
        Ok(def)
    }

    fn bayes(&mut self) -> PResult<BayesDef> {
        self.keyword("bayes")?;
        let (name, _) = self.ident("model name")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut def = BayesDef {
            name,
            nodes: Vec::new(),
        };
        let mut nodes = Names::new("node");
        while *self.peek() != Tok::RBrace {
            let pos = self.keyword("node")?;
            let (nname, _) = self.ident("node name")?;
            self.keyword("states")?;
            let states = self.ident_list("state name")?;
            let parents = if self.is_keyword("parents") {
                self.next();
                self.ident_list("parent name")?
            } else {
                Vec::new()
            };
            self.keyword("cpt")?;
            self.expect(Tok::LParen, "`(`")?;
            let mut cpt = vec![self.signed_number()?];
            while *self.peek() == Tok::Comma {
                self.next();
                cpt.push(self.signed_number()?);
            }
            self.expect(Tok::RParen, "`,` or `)`")?;
            self.expect(Tok::Semi, "`;`")?;
            nodes.add(&nname, pos, &mut self.diags);
            def.nodes.push(NodeDecl {
                name: nname,
                states,
                parents,
                cpt,
            });
        }
        self.next();
        Ok(def)
    }

    fn ident_list(&mut self, what: &str) -> PResult<Vec<String>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = vec![self.ident(what)?.0];
        while *self.peek() == Tok::Comma {
            self.next();
            out.push(self.ident(what)?.0);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(out)
    }

    fn signed_number(&mut self) -> PResult<f64> {
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.next();
        }
        match self.peek() {
            Tok::Number(x) => {
                let x = *x;
                self.next();
                Ok(if negative { -x } else { x })
            }
            _ => Err(self.unexpected("number")),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.atom()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::binary(op, lhs, self.atom()?);
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Number(_) | Tok::Minus => Ok(Expr::Num(self.signed_number()?)),
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.next();
                if *self.peek() == Tok::Dot {
                    self.next();
                    let (output, _) = self.ident("output name")?;
                    Ok(Expr::Ref { instance: name, output })
                } else {
                    Ok(Expr::Param(name))
                }
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}
