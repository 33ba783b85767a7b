//! Lifted domain/problem AST and its reader.

use std::collections::HashMap;

use num_traits::Signed;

use super::sexpr::{parse_one, Sexp, Span};
use super::PddlError;
use crate::model::{parse_rational, BinOp, CmpOp, Rational};

const SUPPORTED_REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":equality",
    ":numeric-fluents",
    ":fluents",
    ":durative-actions",
    ":duration-inequalities",
    ":time",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub params: Vec<TypedName>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Object(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub name: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LExpr {
    Const(Rational),
    Fluent(Atom),
    Binary(BinOp, Box<LExpr>, Box<LExpr>),
    Neg(Box<LExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LFormula {
    True,
    False,
    Atom(Atom),
    Equal(Term, Term),
    Compare(CmpOp, LExpr, LExpr),
    And(Vec<LFormula>),
    Or(Vec<LFormula>),
    Not(Box<LFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LEffect {
    Set(Atom, bool),
    Assign(Atom, LExpr),
    Increase(Atom, LExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: LFormula,
    pub effects: Vec<LEffect>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DurativeSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub lower: Rational,
    pub upper: Rational,
    pub at_start: LFormula,
    pub over_all: LFormula,
    pub at_end: LFormula,
    pub start_effects: Vec<LEffect>,
    pub end_effects: Vec<LEffect>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: LFormula,
    pub rates: Vec<(Atom, LExpr)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// type -> parent type; `object` is the implicit root.
    pub types: HashMap<String, String>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<Signature>,
    pub functions: Vec<Signature>,
    pub actions: Vec<ActionSchema>,
    pub durative_actions: Vec<DurativeSchema>,
    pub processes: Vec<ProcessSchema>,
    pub events: Vec<ActionSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitFact {
    True(Atom),
    Value(Atom, Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<InitFact>,
    pub goal: LFormula,
}

impl Domain {
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut current = ty;
        for _ in 0..=self.types.len() {
            if current == ancestor {
                return true;
            }
            match self.types.get(current) {
                Some(parent) => current = parent,
                None => return ancestor == "object",
            }
        }
        false
    }

    fn has_type(&self, ty: &str) -> bool {
        ty == "object" || self.types.contains_key(ty)
    }

    pub fn predicate(&self, name: &str) -> Option<&Signature> {
        self.predicates.iter().find(|s| s.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Signature> {
        self.functions.iter().find(|s| s.name == name)
    }

    pub fn is_plus(&self) -> bool {
        !self.processes.is_empty() || !self.events.is_empty()
    }
}

pub fn parse_domain_problem(domain: &str, problem: &str) -> Result<(Domain, ProblemSpec), PddlError> {
    let d = parse_domain(domain)?;
    let p = parse_problem(&d, problem)?;
    Ok((d, p))
}

fn expect_list<'a>(e: &'a Sexp, what: &str) -> Result<&'a [Sexp], PddlError> {
    e.as_list().ok_or_else(|| PddlError::syntax(e.span(), format!("expected a list for {what}, found `{e}`")))
}

fn expect_atom<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, PddlError> {
    e.as_atom().ok_or_else(|| PddlError::syntax(e.span(), format!("expected {what}, found `{e}`")))
}

fn is_number(text: &str) -> bool {
    text.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '.' || c == '+')
        && parse_rational(text).is_some()
}

/// Parses `?a ?b - t ?c` style lists. Untyped entries get `object`.
fn typed_list(items: &[Sexp], variables: bool) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if item.is_keyword("-") {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| PddlError::syntax(item.span(), "missing type after `-`"))?;
            if ty.head() == Some("either") {
                return Err(PddlError::unsupported(ty.span(), "either-types"));
            }
            let ty = expect_atom(ty, "a type name")?;
            if pending.is_empty() {
                return Err(PddlError::syntax(item.span(), "type annotation without names"));
            }
            out.extend(pending.drain(..).map(|name| TypedName { name, ty: ty.to_string() }));
            i += 2;
            continue;
        }
        let name = expect_atom(item, "a name")?;
        if variables != name.starts_with('?') {
            let expected = if variables { "a ?variable" } else { "an object name" };
            return Err(PddlError::syntax(item.span(), format!("expected {expected}, found `{name}`")));
        }
        pending.push(name.to_string());
        i += 1;
    }
    out.extend(pending.into_iter().map(|name| TypedName { name, ty: "object".into() }));
    Ok(out)
}

struct Scope<'a> {
    domain: &'a Domain,
    vars: HashMap<String, String>,
    objects: &'a HashMap<String, String>,
}

impl Scope<'_> {
    fn term(&self, e: &Sexp) -> Result<(Term, String), PddlError> {
        let name = expect_atom(e, "a term")?;
        if name == "?duration" {
            return Err(PddlError::unsupported(e.span(), "duration-dependent conditions or effects"));
        }
        if name.starts_with('?') {
            let ty = self
                .vars
                .get(name)
                .ok_or_else(|| PddlError::type_error(e.span(), format!("undeclared variable `{name}`")))?;
            Ok((Term::Var(name.to_string()), ty.clone()))
        } else {
            let ty = self
                .objects
                .get(name)
                .ok_or_else(|| PddlError::type_error(e.span(), format!("unknown object `{name}`")))?;
            Ok((Term::Object(name.to_string()), ty.clone()))
        }
    }

    fn atom(&self, e: &Sexp, sig: &Signature) -> Result<Atom, PddlError> {
        let items = expect_list(e, "an atom")?;
        let args = &items[1..];
        if args.len() != sig.params.len() {
            return Err(PddlError::type_error(
                e.span(),
                format!("`{}` expects {} arguments, got {}", sig.name, sig.params.len(), args.len()),
            ));
        }
        let mut terms = Vec::with_capacity(args.len());
        for (arg, param) in args.iter().zip(&sig.params) {
            let (term, ty) = self.term(arg)?;
            if !self.domain.is_subtype(&ty, &param.ty) {
                return Err(PddlError::type_error(
                    arg.span(),
                    format!("argument `{arg}` of `{}` has type `{ty}`, expected `{}`", sig.name, param.ty),
                ));
            }
            terms.push(term);
        }
        Ok(Atom { name: sig.name.clone(), args: terms })
    }

    fn predicate_atom(&self, e: &Sexp) -> Result<Atom, PddlError> {
        let head = e.head().ok_or_else(|| PddlError::syntax(e.span(), format!("expected an atom, found `{e}`")))?;
        match self.domain.predicate(head) {
            Some(sig) => self.atom(e, sig),
            None if self.domain.function(head).is_some() => {
                Err(PddlError::type_error(e.span(), format!("function `{head}` used as a predicate")))
            }
            None => Err(PddlError::type_error(e.span(), format!("undeclared predicate `{head}`"))),
        }
    }

    fn function_atom(&self, e: &Sexp) -> Result<Atom, PddlError> {
        let head = e.head().ok_or_else(|| PddlError::syntax(e.span(), format!("expected a function term, found `{e}`")))?;
        match self.domain.function(head) {
            Some(sig) => self.atom(e, sig),
            None => Err(PddlError::type_error(e.span(), format!("undeclared function `{head}`"))),
        }
    }

    fn expr(&self, e: &Sexp) -> Result<LExpr, PddlError> {
        if let Some(text) = e.as_atom() {
            if is_number(text) {
                return Ok(LExpr::Const(parse_rational(text).unwrap()));
            }
            if text == "#t" {
                return Err(PddlError::unsupported(e.span(), "continuous-effects"));
            }
            if text == "?duration" {
                return Err(PddlError::unsupported(e.span(), "duration-dependent conditions or effects"));
            }
            return Err(PddlError::type_error(e.span(), format!("`{text}` is not a numeric expression")));
        }
        let items = e.as_list().unwrap();
        let head = items
            .first()
            .and_then(Sexp::as_atom)
            .ok_or_else(|| PddlError::syntax(e.span(), "empty numeric expression"))?;
        let op = match head {
            "+" => Some(BinOp::Add),
            "-" => Some(BinOp::Sub),
            "*" => Some(BinOp::Mul),
            "/" => Some(BinOp::Div),
            _ => None,
        };
        match op {
            Some(BinOp::Sub) if items.len() == 2 => Ok(LExpr::Neg(Box::new(self.expr(&items[1])?))),
            Some(op) => {
                if items.len() < 3 || (matches!(op, BinOp::Sub | BinOp::Div) && items.len() != 3) {
                    return Err(PddlError::syntax(e.span(), format!("wrong number of operands for `{head}`")));
                }
                let mut acc = self.expr(&items[1])?;
                for operand in &items[2..] {
                    acc = LExpr::Binary(op, Box::new(acc), Box::new(self.expr(operand)?));
                }
                // `(/ p q)` is how non-terminating constants are written
                if let LExpr::Binary(BinOp::Div, p, q) = &acc {
                    if let (LExpr::Const(p), LExpr::Const(q)) = (&**p, &**q) {
                        if !num_traits::Zero::is_zero(q) {
                            return Ok(LExpr::Const(p / q));
                        }
                    }
                }
                Ok(acc)
            }
            None => Ok(LExpr::Fluent(self.function_atom(e)?)),
        }
    }

    fn formula(&self, e: &Sexp) -> Result<LFormula, PddlError> {
        let items = expect_list(e, "a condition")?;
        let Some(first) = items.first() else {
            return Ok(LFormula::True);
        };
        let head = expect_atom(first, "a connective or predicate")?;
        let args = &items[1..];
        match head {
            "and" => Ok(LFormula::And(args.iter().map(|a| self.formula(a)).collect::<Result<_, _>>()?)),
            "or" => Ok(LFormula::Or(args.iter().map(|a| self.formula(a)).collect::<Result<_, _>>()?)),
            "not" => {
                if args.len() != 1 {
                    return Err(PddlError::syntax(e.span(), "`not` takes exactly one argument"));
                }
                Ok(LFormula::Not(Box::new(self.formula(&args[0])?)))
            }
            "imply" => {
                if args.len() != 2 {
                    return Err(PddlError::syntax(e.span(), "`imply` takes exactly two arguments"));
                }
                Ok(LFormula::Or(vec![LFormula::Not(Box::new(self.formula(&args[0])?)), self.formula(&args[1])?]))
            }
            "forall" | "exists" => Err(PddlError::unsupported(e.span(), "quantified-preconditions")),
            "preference" => Err(PddlError::unsupported(e.span(), "preferences")),
            "at" | "over" if looks_qualified(items) => {
                Err(PddlError::syntax(e.span(), "temporal qualifier outside a durative action"))
            }
            "<" | "<=" | "=" | ">=" | ">" => {
                if args.len() != 2 {
                    return Err(PddlError::syntax(e.span(), format!("`{head}` takes exactly two arguments")));
                }
                let is_term = |s: &Sexp| s.as_atom().is_some_and(|a| !is_number(a) && a != "#t" && a != "?duration");
                if head == "=" && is_term(&args[0]) && is_term(&args[1]) {
                    return Ok(LFormula::Equal(self.term(&args[0])?.0, self.term(&args[1])?.0));
                }
                let op = match head {
                    "<" => CmpOp::Lt,
                    "<=" => CmpOp::Le,
                    "=" => CmpOp::Eq,
                    ">=" => CmpOp::Ge,
                    _ => CmpOp::Gt,
                };
                Ok(LFormula::Compare(op, self.expr(&args[0])?, self.expr(&args[1])?))
            }
            _ => Ok(LFormula::Atom(self.predicate_atom(e)?)),
        }
    }

    fn effects(&self, e: &Sexp, out: &mut Vec<LEffect>) -> Result<(), PddlError> {
        let items = expect_list(e, "an effect")?;
        let Some(first) = items.first() else {
            return Ok(());
        };
        let head = expect_atom(first, "an effect")?;
        let args = &items[1..];
        match head {
            "and" => args.iter().try_for_each(|a| self.effects(a, out)),
            "not" => {
                if args.len() != 1 {
                    return Err(PddlError::syntax(e.span(), "`not` takes exactly one argument"));
                }
                out.push(LEffect::Set(self.predicate_atom(&args[0])?, false));
                Ok(())
            }
            "when" => Err(PddlError::unsupported(e.span(), "conditional-effects")),
            "forall" => Err(PddlError::unsupported(e.span(), "universal-effects")),
            "at" | "over" if looks_qualified(items) => {
                Err(PddlError::syntax(e.span(), "temporal qualifier outside a durative action"))
            }
            "assign" | "increase" | "decrease" | "scale-up" | "scale-down" => {
                if args.len() != 2 {
                    return Err(PddlError::syntax(e.span(), format!("`{head}` takes exactly two arguments")));
                }
                let target = self.function_atom(&args[0])?;
                let value = self.expr(&args[1])?;
                let current = || Box::new(LExpr::Fluent(target.clone()));
                out.push(match head {
                    "assign" => LEffect::Assign(target.clone(), value),
                    "increase" => LEffect::Increase(target.clone(), value),
                    "decrease" => LEffect::Increase(target.clone(), LExpr::Neg(Box::new(value))),
                    "scale-up" => LEffect::Assign(target.clone(), LExpr::Binary(BinOp::Mul, current(), Box::new(value))),
                    _ => LEffect::Assign(target.clone(), LExpr::Binary(BinOp::Div, current(), Box::new(value))),
                });
                Ok(())
            }
            _ => {
                out.push(LEffect::Set(self.predicate_atom(e)?, true));
                Ok(())
            }
        }
    }

    /// Rate of a process effect: `(increase (f) (* #t e))`, `(* e #t)` or bare `#t`.
    fn rate(&self, e: &Sexp) -> Result<(Atom, LExpr), PddlError> {
        let items = expect_list(e, "a process effect")?;
        let head = items.first().and_then(Sexp::as_atom).unwrap_or("");
        if !matches!(head, "increase" | "decrease") || items.len() != 3 {
            return Err(PddlError::syntax(e.span(), format!("process effects must be `(increase f (* #t e))`, found `{e}`")));
        }
        let target = self.function_atom(&items[1])?;
        let body = &items[2];
        let rate = if body.is_keyword("#t") {
            LExpr::Const(Rational::from_integer(1.into()))
        } else {
            let parts = body.as_list().unwrap_or(&[]);
            match parts {
                [op, a, b] if op.is_keyword("*") && a.is_keyword("#t") => self.expr(b)?,
                [op, a, b] if op.is_keyword("*") && b.is_keyword("#t") => self.expr(a)?,
                _ => return Err(PddlError::syntax(body.span(), format!("process rate must be `(* #t e)`, found `{body}`"))),
            }
        };
        let rate = if head == "decrease" { LExpr::Neg(Box::new(rate)) } else { rate };
        Ok((target, rate))
    }
}

fn constant_value(e: &LExpr) -> Option<Rational> {
    match e {
        LExpr::Const(c) => Some(c.clone()),
        LExpr::Fluent(_) => None,
        LExpr::Neg(a) => Some(-constant_value(a)?),
        LExpr::Binary(op, a, b) => {
            let (a, b) = (constant_value(a)?, constant_value(b)?);
            Some(match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if num_traits::Zero::is_zero(&b) {
                        return None;
                    }
                    a / b
                }
            })
        }
    }
}

struct KeywordArgs<'a> {
    values: Vec<(&'a str, &'a Sexp)>,
}

impl<'a> KeywordArgs<'a> {
    fn parse(items: &'a [Sexp], allowed: &[&str], what: &str) -> Result<Self, PddlError> {
        let mut values = Vec::new();
        let mut i = 0;
        while i < items.len() {
            let key = expect_atom(&items[i], "a keyword")?;
            if !allowed.contains(&key) {
                return Err(PddlError::syntax(items[i].span(), format!("unexpected `{key}` in {what}")));
            }
            let value = items
                .get(i + 1)
                .ok_or_else(|| PddlError::syntax(items[i].span(), format!("missing value for `{key}` in {what}")))?;
            values.push((key, value));
            i += 2;
        }
        Ok(KeywordArgs { values })
    }

    fn get(&self, key: &str) -> Option<&'a Sexp> {
        self.values.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }
}

fn schema_scope<'a>(
    domain: &'a Domain,
    objects: &'a HashMap<String, String>,
    params: Option<&Sexp>,
) -> Result<(Scope<'a>, Vec<TypedName>), PddlError> {
    let params = match params {
        Some(p) => typed_list(expect_list(p, ":parameters")?, true)?,
        None => Vec::new(),
    };
    let mut vars = HashMap::new();
    for p in &params {
        if !domain.has_type(&p.ty) {
            return Err(PddlError::type_error(Span::default(), format!("undeclared type `{}`", p.ty)));
        }
        vars.insert(p.name.clone(), p.ty.clone());
    }
    Ok((Scope { domain, vars, objects }, params))
}

fn parse_duration(e: &Sexp, action: &str) -> Result<(Rational, Rational), PddlError> {
    let items = expect_list(e, ":duration")?;
    let constraints: Vec<&Sexp> = if e.head() == Some("and") { items[1..].iter().collect() } else { vec![e] };
    let (mut lower, mut upper) = (None, None);
    for c in constraints {
        let parts = expect_list(c, "a duration constraint")?;
        let op = parts.first().and_then(Sexp::as_atom).unwrap_or("");
        if parts.len() != 3 || !parts[1].is_keyword("?duration") {
            return Err(PddlError::syntax(c.span(), format!("malformed duration constraint `{c}` in `{action}`")));
        }
        let domain = Domain::default();
        let objects = HashMap::new();
        let scope = Scope { domain: &domain, vars: HashMap::new(), objects: &objects };
        let value = scope
            .expr(&parts[2])
            .ok()
            .and_then(|v| constant_value(&v))
            .ok_or_else(|| PddlError::unsupported(parts[2].span(), "non-constant duration"))?;
        match op {
            "=" => {
                lower = Some(value.clone());
                upper = Some(value);
            }
            ">=" => lower = Some(value),
            "<=" => upper = Some(value),
            "<" | ">" => return Err(PddlError::unsupported(c.span(), "strict duration bounds")),
            _ => return Err(PddlError::syntax(c.span(), format!("malformed duration constraint `{c}` in `{action}`"))),
        }
    }
    match (lower, upper) {
        (Some(l), Some(u)) => {
            if !l.is_positive() || l > u {
                return Err(PddlError::syntax(e.span(), format!("duration bounds of `{action}` must satisfy 0 < lower <= upper")));
            }
            Ok((l, u))
        }
        _ => Err(PddlError::unsupported(e.span(), format!("open duration interval in `{action}`"))),
    }
}

/// `(at start x)`, `(at end x)`, `(over all x)`; `at` alone is a legal predicate name.
fn looks_qualified(items: &[Sexp]) -> bool {
    match items {
        [a, b, _] => {
            (a.is_keyword("at") && (b.is_keyword("start") || b.is_keyword("end")))
                || (a.is_keyword("over") && b.is_keyword("all"))
        }
        _ => false,
    }
}

fn timed_parts<'a>(e: &'a Sexp, what: &str) -> Result<Vec<(&'static str, &'a Sexp)>, PddlError> {
    let items = expect_list(e, what)?;
    if items.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&Sexp> = if e.head() == Some("and") { items[1..].iter().collect() } else { vec![e] };
    let mut out = Vec::new();
    for part in parts {
        let p = expect_list(part, what)?;
        let qualifier = match p {
            [a, b, _] if a.is_keyword("at") && b.is_keyword("start") => "start",
            [a, b, _] if a.is_keyword("at") && b.is_keyword("end") => "end",
            [a, b, _] if a.is_keyword("over") && b.is_keyword("all") => "all",
            [a, b, _] if a.is_keyword("at") && b.as_atom().is_some_and(is_number) => {
                return Err(PddlError::unsupported(part.span(), "timed-initial-literals"));
            }
            _ if part.head() == Some("increase") || part.head() == Some("decrease") => {
                return Err(PddlError::unsupported(part.span(), "continuous-effects"));
            }
            _ => return Err(PddlError::syntax(part.span(), format!("{what} `{part}` lacks `at start`, `at end` or `over all`"))),
        };
        out.push((qualifier, &p[2]));
    }
    Ok(out)
}

pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let root = parse_one(text)?;
    let items = expect_list(&root, "a domain")?;
    if root.head() != Some("define") || items.len() < 2 || items[1].head() != Some("domain") {
        return Err(PddlError::syntax(root.span(), "expected `(define (domain <name>) ...)`"));
    }
    let name_parts = expect_list(&items[1], "the domain name")?;
    let name = name_parts
        .get(1)
        .and_then(Sexp::as_atom)
        .ok_or_else(|| PddlError::syntax(items[1].span(), "missing domain name"))?;
    let mut domain = Domain { name: name.to_string(), ..Domain::default() };
    let mut constants = HashMap::new();

    // declarations first so schemas may appear in any order
    let sections = &items[2..];
    for section in sections {
        let parts = expect_list(section, "a domain section")?;
        let head = section.head().unwrap_or("");
        let args = parts.get(1..).unwrap_or(&[]);
        match head {
            ":requirements" => {
                for r in args {
                    let r = expect_atom(r, "a requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(PddlError::unsupported(section.span(), r.trim_start_matches(':')));
                    }
                    domain.requirements.push(r.to_string());
                }
            }
            ":types" => {
                for t in typed_list(args, false)? {
                    if t.ty != "object" && !domain.types.contains_key(&t.ty) {
                        domain.types.insert(t.ty.clone(), "object".into());
                    }
                    if t.name != "object" {
                        domain.types.insert(t.name, t.ty);
                    }
                }
            }
            ":constants" => {
                for c in typed_list(args, false)? {
                    constants.insert(c.name.clone(), c.ty.clone());
                    domain.constants.push(c);
                }
            }
            ":predicates" | ":functions" => {
                let mut i = 0;
                while i < args.len() {
                    let decl = &args[i];
                    if decl.is_keyword("-") {
                        // `- number` result type on functions
                        i += 2;
                        continue;
                    }
                    let parts = expect_list(decl, "a declaration")?;
                    let name = parts
                        .first()
                        .and_then(Sexp::as_atom)
                        .ok_or_else(|| PddlError::syntax(decl.span(), "declaration without a name"))?;
                    let params = typed_list(&parts[1..], true)?;
                    let sig = Signature { name: name.to_string(), params, span: decl.span() };
                    if domain.predicate(name).is_some() || domain.function(name).is_some() {
                        return Err(PddlError::type_error(decl.span(), format!("`{name}` declared twice")));
                    }
                    if head == ":predicates" {
                        domain.predicates.push(sig);
                    } else {
                        domain.functions.push(sig);
                    }
                    i += 1;
                }
            }
            ":action" | ":durative-action" | ":process" | ":event" => {}
            ":derived" => return Err(PddlError::unsupported(section.span(), "derived-predicates")),
            ":constraints" => return Err(PddlError::unsupported(section.span(), "constraints")),
            other => return Err(PddlError::syntax(section.span(), format!("unknown domain section `{other}`"))),
        }
    }
    for decl in domain.predicates.iter().chain(&domain.functions).flat_map(|s| &s.params) {
        if !domain.has_type(&decl.ty) {
            return Err(PddlError::type_error(Span::default(), format!("undeclared type `{}`", decl.ty)));
        }
    }
    for c in &domain.constants {
        if !domain.has_type(&c.ty) {
            return Err(PddlError::type_error(Span::default(), format!("undeclared type `{}`", c.ty)));
        }
    }

    let mut actions = Vec::new();
    let mut durative_actions = Vec::new();
    let mut processes = Vec::new();
    let mut events = Vec::new();
    for section in sections {
        let parts = section.as_list().unwrap();
        let head = section.head().unwrap_or("");
        if !matches!(head, ":action" | ":durative-action" | ":process" | ":event") {
            continue;
        }
        let schema_name = parts
            .get(1)
            .and_then(Sexp::as_atom)
            .ok_or_else(|| PddlError::syntax(section.span(), format!("`{head}` without a name")))?;
        let what = format!("{head} `{schema_name}`");
        match head {
            ":action" | ":event" => {
                let kw = KeywordArgs::parse(&parts[2..], &[":parameters", ":precondition", ":effect"], &what)?;
                let (scope, params) = schema_scope(&domain, &constants, kw.get(":parameters"))?;
                let precondition = match kw.get(":precondition") {
                    Some(p) => scope.formula(p)?,
                    None => LFormula::True,
                };
                let mut effects = Vec::new();
                if let Some(e) = kw.get(":effect") {
                    scope.effects(e, &mut effects)?;
                }
                let schema = ActionSchema { name: schema_name.to_string(), params, precondition, effects, span: section.span() };
                if head == ":action" {
                    actions.push(schema);
                } else {
                    events.push(schema);
                }
            }
            ":process" => {
                let kw = KeywordArgs::parse(&parts[2..], &[":parameters", ":precondition", ":effect"], &what)?;
                let (scope, params) = schema_scope(&domain, &constants, kw.get(":parameters"))?;
                let precondition = match kw.get(":precondition") {
                    Some(p) => scope.formula(p)?,
                    None => LFormula::True,
                };
                let mut rates = Vec::new();
                if let Some(e) = kw.get(":effect") {
                    let items = expect_list(e, "a process effect")?;
                    let parts: Vec<&Sexp> = if e.head() == Some("and") { items[1..].iter().collect() } else if items.is_empty() { vec![] } else { vec![e] };
                    for p in parts {
                        rates.push(scope.rate(p)?);
                    }
                }
                processes.push(ProcessSchema { name: schema_name.to_string(), params, precondition, rates, span: section.span() });
            }
            _ => {
                let kw = KeywordArgs::parse(&parts[2..], &[":parameters", ":duration", ":condition", ":effect"], &what)?;
                let duration = kw
                    .get(":duration")
                    .ok_or_else(|| PddlError::syntax(section.span(), format!("durative action `{schema_name}` has no :duration")))?;
                let (lower, upper) = parse_duration(duration, schema_name)?;
                let (scope, params) = schema_scope(&domain, &constants, kw.get(":parameters"))?;
                let (mut at_start, mut over_all, mut at_end) = (Vec::new(), Vec::new(), Vec::new());
                if let Some(c) = kw.get(":condition") {
                    for (q, body) in timed_parts(c, "condition")? {
                        let f = scope.formula(body)?;
                        match q {
                            "start" => at_start.push(f),
                            "end" => at_end.push(f),
                            _ => over_all.push(f),
                        }
                    }
                }
                let (mut start_effects, mut end_effects) = (Vec::new(), Vec::new());
                if let Some(e) = kw.get(":effect") {
                    for (q, body) in timed_parts(e, "effect")? {
                        match q {
                            "start" => scope.effects(body, &mut start_effects)?,
                            "end" => scope.effects(body, &mut end_effects)?,
                            _ => return Err(PddlError::unsupported(body.span(), "continuous-effects")),
                        }
                    }
                }
                durative_actions.push(DurativeSchema {
                    name: schema_name.to_string(),
                    params,
                    lower,
                    upper,
                    at_start: LFormula::And(at_start),
                    over_all: LFormula::And(over_all),
                    at_end: LFormula::And(at_end),
                    start_effects,
                    end_effects,
                    span: section.span(),
                });
            }
        }
    }
    domain.actions = actions;
    domain.durative_actions = durative_actions;
    domain.processes = processes;
    domain.events = events;
    if !domain.durative_actions.is_empty() && domain.is_plus() {
        return Err(PddlError::unsupported(root.span(), "durative actions mixed with processes or events"));
    }
    Ok(domain)
}

pub fn parse_problem(domain: &Domain, text: &str) -> Result<ProblemSpec, PddlError> {
    let root = parse_one(text)?;
    let items = expect_list(&root, "a problem")?;
    if root.head() != Some("define") || items.len() < 2 || items[1].head() != Some("problem") {
        return Err(PddlError::syntax(root.span(), "expected `(define (problem <name>) ...)`"));
    }
    let name = expect_list(&items[1], "the problem name")?
        .get(1)
        .and_then(Sexp::as_atom)
        .ok_or_else(|| PddlError::syntax(items[1].span(), "missing problem name"))?
        .to_string();
    let mut spec = ProblemSpec { name, domain: domain.name.clone(), objects: Vec::new(), init: Vec::new(), goal: LFormula::True };
    let mut objects: HashMap<String, String> =
        domain.constants.iter().map(|c| (c.name.clone(), c.ty.clone())).collect();

    let sections = &items[2..];
    for section in sections {
        let parts = expect_list(section, "a problem section")?;
        match section.head().unwrap_or("") {
            ":domain" => {
                let d = parts.get(1).and_then(Sexp::as_atom).unwrap_or("");
                if d != domain.name {
                    return Err(PddlError::syntax(section.span(), format!("problem is for domain `{d}`, not `{}`", domain.name)));
                }
            }
            ":objects" => {
                for o in typed_list(&parts[1..], false)? {
                    if !domain.has_type(&o.ty) {
                        return Err(PddlError::type_error(section.span(), format!("undeclared type `{}`", o.ty)));
                    }
                    if objects.insert(o.name.clone(), o.ty.clone()).is_some() {
                        return Err(PddlError::type_error(section.span(), format!("object `{}` declared twice", o.name)));
                    }
                    spec.objects.push(o);
                }
            }
            ":requirements" => {
                for r in &parts[1..] {
                    let r = expect_atom(r, "a requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(PddlError::unsupported(section.span(), r.trim_start_matches(':')));
                    }
                }
            }
            ":init" | ":goal" => {}
            ":metric" => return Err(PddlError::unsupported(section.span(), "metric")),
            ":constraints" => return Err(PddlError::unsupported(section.span(), "constraints")),
            other => return Err(PddlError::syntax(section.span(), format!("unknown problem section `{other}`"))),
        }
    }

    let scope = Scope { domain, vars: HashMap::new(), objects: &objects };
    for section in sections {
        let parts = section.as_list().unwrap();
        match section.head().unwrap_or("") {
            ":init" => {
                for fact in &parts[1..] {
                    let f = expect_list(fact, "an initial fact")?;
                    match fact.head() {
                        Some("=") if f.len() == 3 => {
                            let atom = scope.function_atom(&f[1])?;
                            let value = f[2]
                                .as_atom()
                                .and_then(parse_rational)
                                .ok_or_else(|| PddlError::syntax(f[2].span(), format!("expected a number, found `{}`", f[2])))?;
                            spec.init.push(InitFact::Value(atom, value));
                        }
                        Some("at") if f.len() == 3 && f[1].as_atom().is_some_and(is_number) => {
                            return Err(PddlError::unsupported(fact.span(), "timed-initial-literals"));
                        }
                        // closed world: negative facts are the default
                        Some("not") => {}
                        _ => spec.init.push(InitFact::True(scope.predicate_atom(fact)?)),
                    }
                }
            }
            ":goal" => {
                spec.goal = scope.formula(parts.get(1).ok_or_else(|| PddlError::syntax(section.span(), "empty goal"))?)?;
            }
            _ => {}
        }
    }
    Ok(spec)
}
