//! Exhaustive instantiation of lifted schemas over typed objects.

use std::collections::HashMap;

use super::lifted::{ActionSchema, Atom, Domain, InitFact, LEffect, LExpr, LFormula, ProblemSpec, Term, TypedName};
use super::PddlError;
use crate::model::{
    DurativeAction, Effect, Fluent, FluentId, Formula, InstantAction, NumExpr, PlusProblem, Process, State,
    TemporalProblem, Value,
};

type Binding = HashMap<String, String>;

struct Grounder<'a> {
    domain: &'a Domain,
    /// (object name, type), constants first, sorted by name within the problem.
    objects: Vec<(String, String)>,
    fluents: Vec<Fluent>,
    ids: HashMap<String, FluentId>,
}

fn ground_name(name: &str, args: &[String]) -> String {
    let mut out = name.to_string();
    for a in args {
        out.push(' ');
        out.push_str(a);
    }
    out
}

impl<'a> Grounder<'a> {
    fn new(domain: &'a Domain, problem: &ProblemSpec) -> Self {
        let mut objects: Vec<(String, String)> = domain
            .constants
            .iter()
            .chain(&problem.objects)
            .map(|o| (o.name.clone(), o.ty.clone()))
            .collect();
        objects.sort();
        objects.dedup();
        let mut g = Grounder { domain, objects, fluents: Vec::new(), ids: HashMap::new() };
        for sig in &domain.predicates {
            for args in g.tuples(&sig.params) {
                g.declare(Fluent::boolean(ground_name(&sig.name, &args)));
            }
        }
        for sig in &domain.functions {
            for args in g.tuples(&sig.params) {
                g.declare(Fluent::numeric(ground_name(&sig.name, &args)));
            }
        }
        g
    }

    fn declare(&mut self, fluent: Fluent) {
        self.ids.insert(fluent.name.clone(), FluentId(self.fluents.len()));
        self.fluents.push(fluent);
    }

    /// All argument tuples for `params`, in lexicographic order.
    fn tuples(&self, params: &[TypedName]) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new()];
        for p in params {
            let candidates: Vec<&str> = self
                .objects
                .iter()
                .filter(|(_, ty)| self.domain.is_subtype(ty, &p.ty))
                .map(|(n, _)| n.as_str())
                .collect();
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    candidates.iter().map(move |c| {
                        let mut next = prefix.clone();
                        next.push(c.to_string());
                        next
                    })
                })
                .collect();
        }
        out
    }

    fn bindings(&self, params: &[TypedName]) -> Vec<(Vec<String>, Binding)> {
        self.tuples(params)
            .into_iter()
            .map(|args| {
                let binding = params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect();
                (args, binding)
            })
            .collect()
    }

    fn term<'t>(&self, t: &'t Term, b: &'t Binding) -> &'t str {
        match t {
            Term::Object(o) => o,
            Term::Var(v) => &b[v],
        }
    }

    fn atom(&self, a: &Atom, b: &Binding) -> Result<FluentId, PddlError> {
        let args: Vec<String> = a.args.iter().map(|t| self.term(t, b).to_string()).collect();
        let name = ground_name(&a.name, &args);
        self.ids
            .get(&name)
            .copied()
            .ok_or_else(|| PddlError::Ground(format!("unknown ground fluent `({name})`")))
    }

    fn expr(&self, e: &LExpr, b: &Binding) -> Result<NumExpr, PddlError> {
        Ok(match e {
            LExpr::Const(c) => NumExpr::constant(c.clone()),
            LExpr::Fluent(a) => NumExpr::fluent(self.atom(a, b)?),
            LExpr::Binary(op, x, y) => NumExpr::binary(*op, self.expr(x, b)?, self.expr(y, b)?),
            LExpr::Neg(x) => NumExpr::neg(self.expr(x, b)?),
        })
    }

    fn formula(&self, f: &LFormula, b: &Binding) -> Result<Formula, PddlError> {
        Ok(match f {
            LFormula::True => Formula::True,
            LFormula::False => Formula::False,
            LFormula::Atom(a) => Formula::Atom(self.atom(a, b)?),
            LFormula::Equal(x, y) => {
                if self.term(x, b) == self.term(y, b) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            LFormula::Compare(op, x, y) => Formula::compare(*op, self.expr(x, b)?, self.expr(y, b)?),
            LFormula::And(parts) => Formula::and(parts.iter().map(|p| self.formula(p, b)).collect::<Result<Vec<_>, _>>()?),
            LFormula::Or(parts) => Formula::or(parts.iter().map(|p| self.formula(p, b)).collect::<Result<Vec<_>, _>>()?),
            LFormula::Not(inner) => Formula::not(self.formula(inner, b)?),
        })
    }

    /// Ground effects; on an add/delete clash for the same atom the add wins,
    /// and identical effects collapse.
    fn effects(&self, effs: &[LEffect], b: &Binding) -> Result<Vec<Effect>, PddlError> {
        let mut out: Vec<Effect> = Vec::new();
        for e in effs {
            let eff = match e {
                LEffect::Set(a, v) => Effect::set(self.atom(a, b)?, *v),
                LEffect::Assign(a, x) => Effect::assign(self.atom(a, b)?, self.expr(x, b)?),
                LEffect::Increase(a, x) => Effect::increase(self.atom(a, b)?, self.expr(x, b)?),
            };
            if out.contains(&eff) {
                continue;
            }
            if let crate::model::EffectKind::SetBool(v) = eff.kind {
                if let Some(existing) = out.iter_mut().find(|o| o.target == eff.target) {
                    if v {
                        *existing = eff;
                    }
                    continue;
                }
            }
            out.push(eff);
        }
        Ok(out)
    }

    fn instant(&self, schema: &ActionSchema) -> Result<Vec<InstantAction>, PddlError> {
        self.bindings(&schema.params)
            .into_iter()
            .map(|(args, b)| {
                Ok(InstantAction::new(
                    ground_name(&schema.name, &args),
                    self.formula(&schema.precondition, &b)?,
                    self.effects(&schema.effects, &b)?,
                ))
            })
            .collect()
    }

    fn init(&self, problem: &ProblemSpec) -> Result<State, PddlError> {
        let mut state = State::defaults(&self.fluents);
        let empty = Binding::new();
        for fact in &problem.init {
            match fact {
                InitFact::True(a) => state.set(self.atom(a, &empty)?, Value::Bool(true)),
                InitFact::Value(a, v) => state.set(self.atom(a, &empty)?, Value::Num(v.clone())),
            }
        }
        Ok(state)
    }
}

fn sort_by_name<T>(items: &mut [(String, T)]) {
    items.sort_by(|a, b| a.0.cmp(&b.0));
}

/// Grounds a durative-action domain. Ground actions are ordered by schema name,
/// then argument tuple; statically false preconditions are kept.
pub fn ground_temporal(domain: &Domain, problem: &ProblemSpec) -> Result<TemporalProblem, PddlError> {
    if domain.is_plus() {
        return Err(PddlError::Ground("domain declares processes or events; expected a temporal domain".into()));
    }
    let g = Grounder::new(domain, problem);
    let mut instants: Vec<(String, InstantAction)> = Vec::new();
    for schema in &domain.actions {
        for a in g.instant(schema)? {
            instants.push((schema.name.clone(), a));
        }
    }
    let mut duratives: Vec<(String, DurativeAction)> = Vec::new();
    for schema in &domain.durative_actions {
        for (args, b) in g.bindings(&schema.params) {
            let name = ground_name(&schema.name, &args);
            let start = InstantAction::new(name.clone(), g.formula(&schema.at_start, &b)?, g.effects(&schema.start_effects, &b)?);
            let end = InstantAction::new(name.clone(), g.formula(&schema.at_end, &b)?, g.effects(&schema.end_effects, &b)?);
            duratives.push((
                schema.name.clone(),
                DurativeAction {
                    name,
                    lower: schema.lower.clone(),
                    upper: schema.upper.clone(),
                    start,
                    end,
                    overall: g.formula(&schema.over_all, &b)?,
                },
            ));
        }
    }
    // stable sort keeps the lexicographic argument order inside each schema
    sort_by_name(&mut instants);
    sort_by_name(&mut duratives);
    let result = TemporalProblem {
        domain_name: domain.name.clone(),
        problem_name: problem.name.clone(),
        init: g.init(problem)?,
        goal: g.formula(&problem.goal, &Binding::new())?,
        instant_actions: instants.into_iter().map(|(_, a)| a).collect(),
        durative_actions: duratives.into_iter().map(|(_, a)| a).collect(),
        fluents: g.fluents,
    };
    result.validate()?;
    Ok(result)
}

/// Grounds a PDDL+ domain. Schema declaration order is preserved, since it
/// fixes event priority.
pub fn ground_plus(domain: &Domain, problem: &ProblemSpec) -> Result<PlusProblem, PddlError> {
    if !domain.durative_actions.is_empty() {
        return Err(PddlError::Ground("domain declares durative actions; expected a PDDL+ domain".into()));
    }
    let g = Grounder::new(domain, problem);
    let mut actions = Vec::new();
    for schema in &domain.actions {
        actions.extend(g.instant(schema)?);
    }
    let mut events = Vec::new();
    for schema in &domain.events {
        events.extend(g.instant(schema)?);
    }
    let mut processes = Vec::new();
    for schema in &domain.processes {
        for (args, b) in g.bindings(&schema.params) {
            let rates = schema
                .rates
                .iter()
                .map(|(target, rate)| Ok((g.atom(target, &b)?, g.expr(rate, &b)?)))
                .collect::<Result<Vec<_>, PddlError>>()?;
            processes.push(Process { name: ground_name(&schema.name, &args), pre: g.formula(&schema.precondition, &b)?, rates });
        }
    }
    let result = PlusProblem {
        domain_name: domain.name.clone(),
        problem_name: problem.name.clone(),
        init: g.init(problem)?,
        goal: g.formula(&problem.goal, &Binding::new())?,
        actions,
        events,
        processes,
        fluents: g.fluents,
    };
    result.validate()?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::super::{load_temporal, parse_domain_problem};
    use super::*;
    use crate::model::int;

    const DOMAIN: &str = r#"(define (domain d)
      (:requirements :typing :durative-actions :numeric-fluents)
      (:types item)
      (:predicates (done ?i - item))
      (:functions (level))
      (:durative-action work
        :parameters (?i - item)
        :duration (= ?duration 2)
        :condition (at start (not (done ?i)))
        :effect (and (at end (done ?i)) (at end (increase (level) 1)))))"#;

    fn problem(objects: &str, init: &str) -> String {
        format!("(define (problem p) (:domain d) (:objects {objects}) (:init {init}) (:goal (>= (level) 0)))")
    }

    #[test]
    fn one_instance_per_object() {
        let p = load_temporal(DOMAIN, &problem("c b a - item", "")).unwrap();
        let names: Vec<_> = p.durative_actions.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["work a", "work b", "work c"]);
        assert_eq!(p.fluents.len(), 4);
    }

    #[test]
    fn no_objects_no_instances() {
        let p = load_temporal(DOMAIN, &problem("", "")).unwrap();
        assert!(p.durative_actions.is_empty());
    }

    #[test]
    fn missing_numeric_init_defaults_to_zero() {
        let p = load_temporal(DOMAIN, &problem("a - item", "")).unwrap();
        let level = p.fluent_id("level").unwrap();
        assert_eq!(p.init.num_of(level), Some(&int(0)));
        let p = load_temporal(DOMAIN, &problem("a - item", "(= (level) 3/2) (done a)")).unwrap();
        assert_eq!(p.init.num_of(level), Some(&crate::model::rat(3, 2)));
        assert_eq!(p.init.bool_of(p.fluent_id("done a").unwrap()), Some(true));
    }

    #[test]
    fn add_wins_over_delete() {
        let d = DOMAIN.replace("(at end (done ?i))", "(at end (done ?i)) (at end (not (done ?i)))");
        let (d, p) = parse_domain_problem(&d, &problem("a - item", "")).unwrap();
        let t = ground_temporal(&d, &p).unwrap();
        assert_eq!(t.durative_actions[0].end.effects[0], Effect::set(FluentId(0), true));
    }
}
