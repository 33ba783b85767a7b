//! Ground PDDL+ printer.

use super::names::NameRegistry;
use super::sexpr::Sexp;
use crate::model::{
    format_rational, EffectKind, Effect, FluentKind, Formula, InstantAction, NumExpr, PlusProblem, Rational,
};

const WIDTH: usize = 100;

fn atom(text: impl Into<String>) -> Sexp {
    Sexp::atom(text)
}

fn list(items: Vec<Sexp>) -> Sexp {
    Sexp::list(items)
}

fn constant(c: &Rational) -> Sexp {
    let text = format_rational(c);
    if text.contains('/') {
        list(vec![atom("/"), atom(c.numer().to_string()), atom(c.denom().to_string())])
    } else {
        atom(text)
    }
}

fn num_sexp(e: &NumExpr, names: &[String]) -> Sexp {
    match e {
        NumExpr::Const(c) => constant(c),
        NumExpr::Fluent(id) => list(vec![atom(&names[id.0])]),
        NumExpr::Binary(op, a, b) => list(vec![atom(op.symbol()), num_sexp(a, names), num_sexp(b, names)]),
        NumExpr::Neg(a) => list(vec![atom("-"), num_sexp(a, names)]),
    }
}

fn formula_sexp(f: &Formula, names: &[String]) -> Sexp {
    match f {
        Formula::True => list(vec![atom("and")]),
        Formula::False => list(vec![atom("or")]),
        Formula::Atom(id) => list(vec![atom(&names[id.0])]),
        Formula::Compare(op, a, b) => list(vec![atom(op.symbol()), num_sexp(a, names), num_sexp(b, names)]),
        Formula::And(parts) | Formula::Or(parts) => {
            let head = if matches!(f, Formula::And(_)) { "and" } else { "or" };
            let mut items = vec![atom(head)];
            items.extend(parts.iter().map(|p| formula_sexp(p, names)));
            list(items)
        }
        Formula::Not(inner) => list(vec![atom("not"), formula_sexp(inner, names)]),
    }
}

fn effect_sexp(e: &Effect, names: &[String]) -> Sexp {
    let target = list(vec![atom(&names[e.target.0])]);
    match &e.kind {
        EffectKind::SetBool(true) => target,
        EffectKind::SetBool(false) => list(vec![atom("not"), target]),
        EffectKind::Assign(x) => list(vec![atom("assign"), target, num_sexp(x, names)]),
        EffectKind::Increase(x) => list(vec![atom("increase"), target, num_sexp(x, names)]),
    }
}

fn conjunction(mut parts: Vec<Sexp>) -> Sexp {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        parts.insert(0, atom("and"));
        list(parts)
    }
}

/// Renders a formula over fluents called `names` (indexed by fluent id).
pub fn print_formula(f: &Formula, names: &[String]) -> String {
    formula_sexp(f, names).to_string()
}

pub fn print_num_expr(e: &NumExpr, names: &[String]) -> String {
    num_sexp(e, names).to_string()
}

fn block(kind: &str, name: String, pre: &Formula, effect: Sexp, fluents: &[String]) -> Sexp {
    let mut items = vec![atom(kind), atom(name)];
    if *pre != Formula::True {
        items.push(atom(":precondition"));
        items.push(formula_sexp(pre, fluents));
    }
    items.push(atom(":effect"));
    items.push(effect);
    list(items)
}

fn instant_block(kind: &str, a: &InstantAction, names: &mut NameRegistry, fluents: &[String]) -> Sexp {
    let effect = conjunction(a.effects.iter().map(|e| effect_sexp(e, fluents)).collect());
    block(kind, names.intern(&a.name), &a.pre, effect, fluents)
}

/// Domain and problem text for a ground PDDL+ problem. Every fluent becomes a
/// nullary predicate or function; names are sanitized deterministically.
pub fn print_plus(p: &PlusProblem) -> (String, String) {
    let mut fluent_names = NameRegistry::new();
    let fluents: Vec<String> = p.fluents.iter().map(|f| fluent_names.intern(&f.name)).collect();
    let mut op_names = NameRegistry::new();

    let mut domain = vec![
        atom("define"),
        list(vec![atom("domain"), atom(super::names::sanitize(&p.domain_name))]),
        list(
            [":requirements", ":strips", ":negative-preconditions", ":disjunctive-preconditions", ":numeric-fluents", ":time"]
                .into_iter()
                .map(atom)
                .collect(),
        ),
    ];
    let of_kind = |kind: FluentKind| -> Vec<Sexp> {
        p.fluents
            .iter()
            .zip(&fluents)
            .filter(|(f, _)| f.kind == kind)
            .map(|(_, n)| list(vec![atom(n)]))
            .collect()
    };
    for (section, kind) in [(":predicates", FluentKind::Boolean), (":functions", FluentKind::Numeric)] {
        let decls = of_kind(kind);
        if !decls.is_empty() {
            let mut items = vec![atom(section)];
            items.extend(decls);
            domain.push(list(items));
        }
    }
    for a in &p.actions {
        domain.push(instant_block(":action", a, &mut op_names, &fluents));
    }
    for proc in &p.processes {
        let rates = proc
            .rates
            .iter()
            .map(|(target, rate)| {
                list(vec![
                    atom("increase"),
                    list(vec![atom(&fluents[target.0])]),
                    list(vec![atom("*"), atom("#t"), num_sexp(rate, &fluents)]),
                ])
            })
            .collect();
        domain.push(block(":process", op_names.intern(&proc.name), &proc.pre, conjunction(rates), &fluents));
    }
    for e in &p.events {
        domain.push(instant_block(":event", e, &mut op_names, &fluents));
    }

    let mut init = vec![atom(":init")];
    for ((f, name), value) in p.fluents.iter().zip(&fluents).zip(p.init.values()) {
        if f.kind == FluentKind::Boolean && value.as_bool() == Some(true) {
            init.push(list(vec![atom(name)]));
        }
    }
    for ((f, name), value) in p.fluents.iter().zip(&fluents).zip(p.init.values()) {
        if let (FluentKind::Numeric, Some(v)) = (f.kind, value.as_num()) {
            init.push(list(vec![atom("="), list(vec![atom(name)]), atom(format_rational(v))]));
        }
    }
    let problem = list(vec![
        atom("define"),
        list(vec![atom("problem"), atom(super::names::sanitize(&p.problem_name))]),
        list(vec![atom(":domain"), atom(super::names::sanitize(&p.domain_name))]),
        list(init),
        list(vec![atom(":goal"), formula_sexp(&p.goal, &fluents)]),
    ]);
    (list(domain).pretty(WIDTH) + "\n", problem.pretty(WIDTH) + "\n")
}

#[cfg(test)]
mod tests {
    use super::super::load_plus;
    use super::*;
    use crate::model::{int, rat, Effect, Fluent, FluentId, Process, State, Value};

    fn sample() -> PlusProblem {
        let ok = FluentId(0);
        let gc = FluentId(1);
        PlusProblem {
            domain_name: "d".into(),
            problem_name: "p".into(),
            fluents: vec![Fluent::boolean("ok"), Fluent::numeric("gc"), Fluent::boolean("at a.b")],
            init: State::new(vec![Value::Bool(true), Value::Num(rat(1, 3)), Value::Bool(false)]),
            goal: Formula::and([Formula::Atom(ok), Formula::compare(crate::model::CmpOp::Eq, NumExpr::fluent(gc), NumExpr::constant(int(0)))]),
            actions: vec![InstantAction::new("go", Formula::Atom(ok), vec![Effect::set(FluentId(2), true)])],
            events: vec![InstantAction::new(
                "e-lightning",
                Formula::compare(crate::model::CmpOp::Gt, NumExpr::fluent(gc), NumExpr::constant(int(0))),
                vec![Effect::assign(gc, NumExpr::constant(rat(-2, 3)))],
            )],
            processes: vec![Process { name: "p-lightning".into(), pre: Formula::Atom(ok), rates: vec![(gc, NumExpr::constant(int(1)))] }],
        }
    }

    #[test]
    fn lightning_process_golden_line() {
        let (domain, _) = print_plus(&sample());
        assert!(
            domain.contains("(:process p-lightning :precondition (ok) :effect (increase (gc) (* #t 1)))"),
            "{domain}"
        );
    }

    #[test]
    fn no_event_blocks_without_events() {
        let mut p = sample();
        p.events.clear();
        let (domain, _) = print_plus(&p);
        assert!(!domain.contains(":event"));
    }

    #[test]
    fn illegal_fluent_names_are_sanitized() {
        let (domain, _) = print_plus(&sample());
        assert!(domain.contains("(at-a_b)"), "{domain}");
    }

    #[test]
    fn print_parse_print_is_a_fixed_point() {
        let (d1, p1) = print_plus(&sample());
        let reparsed = load_plus(&d1, &p1).unwrap();
        let (d2, p2) = print_plus(&reparsed);
        assert_eq!(d1, d2);
        assert_eq!(p1, p2);
        assert_eq!(reparsed.init.num_of(reparsed.fluent_id("gc").unwrap()), Some(&rat(1, 3)));
        assert_eq!(reparsed.events[0].effects[0].rhs(), Some(&NumExpr::constant(rat(-2, 3))));
    }
}
