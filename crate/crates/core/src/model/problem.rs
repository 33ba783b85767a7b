use std::collections::{BTreeSet, HashMap};

use num_traits::Signed;
use thiserror::Error;

use super::action::{DurativeAction, EffectKind, Event, InstantAction, Process};
use super::expr::{Formula, NumExpr};
use super::number::format_rational;
use super::state::{Fluent, FluentId, FluentKind, State};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate fluent name `{0}`")]
    DuplicateFluent(String),
    #[error("duplicate action name `{0}`")]
    DuplicateAction(String),
    #[error("initial state has {found} values for {expected} fluents")]
    InitSize { expected: usize, found: usize },
    #[error("initial value of `{0}` has the wrong kind")]
    InitKind(String),
    #[error("{context}: reference to undeclared fluent {fluent}")]
    Undeclared { context: String, fluent: FluentId },
    #[error("{context}: `{fluent}` used as {expected:?}")]
    WrongKind { context: String, fluent: String, expected: FluentKind },
    #[error("{context}: `{fluent}` is assigned more than once, or both assigned and increased")]
    ConflictingEffects { context: String, fluent: String },
    #[error("durative action `{name}`: bounds [{lower}, {upper}] must satisfy 0 < lower <= upper")]
    BadBounds { name: String, lower: String, upper: String },
}

/// Ground temporal planning problem (F ∪ X, I, A^i, A^d, G).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalProblem {
    pub domain_name: String,
    pub problem_name: String,
    pub fluents: Vec<Fluent>,
    pub init: State,
    pub instant_actions: Vec<InstantAction>,
    pub durative_actions: Vec<DurativeAction>,
    pub goal: Formula,
}

/// Ground PDDL+ problem (F ∪ X, I, G, A, E, P).
///
/// `events` is kept in firing-priority order: event completion always fires the
/// first applicable event of this list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlusProblem {
    pub domain_name: String,
    pub problem_name: String,
    pub fluents: Vec<Fluent>,
    pub init: State,
    pub goal: Formula,
    pub actions: Vec<InstantAction>,
    pub events: Vec<Event>,
    pub processes: Vec<Process>,
}

pub(crate) struct Checker<'a> {
    fluents: &'a [Fluent],
}

impl<'a> Checker<'a> {
    pub(crate) fn new(fluents: &'a [Fluent]) -> Self {
        Checker { fluents }
    }

    fn fluent(&self, context: &str, id: FluentId) -> Result<&'a Fluent, ModelError> {
        self.fluents
            .get(id.0)
            .ok_or_else(|| ModelError::Undeclared { context: context.to_string(), fluent: id })
    }

    fn expect(&self, context: &str, id: FluentId, kind: FluentKind) -> Result<(), ModelError> {
        let f = self.fluent(context, id)?;
        if f.kind != kind {
            return Err(ModelError::WrongKind { context: context.to_string(), fluent: f.name.clone(), expected: kind });
        }
        Ok(())
    }

    fn num(&self, context: &str, e: &NumExpr) -> Result<(), ModelError> {
        match e {
            NumExpr::Const(_) => Ok(()),
            NumExpr::Fluent(id) => self.expect(context, *id, FluentKind::Numeric),
            NumExpr::Binary(_, a, b) => {
                self.num(context, a)?;
                self.num(context, b)
            }
            NumExpr::Neg(a) => self.num(context, a),
        }
    }

    pub(crate) fn formula(&self, context: &str, f: &Formula) -> Result<(), ModelError> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom(id) => self.expect(context, *id, FluentKind::Boolean),
            Formula::Compare(_, a, b) => {
                self.num(context, a)?;
                self.num(context, b)
            }
            Formula::And(parts) | Formula::Or(parts) => parts.iter().try_for_each(|p| self.formula(context, p)),
            Formula::Not(inner) => self.formula(context, inner),
        }
    }

    pub(crate) fn action(&self, a: &InstantAction) -> Result<(), ModelError> {
        let context = a.name.as_str();
        self.formula(context, &a.pre)?;
        let mut assigned = BTreeSet::new();
        let mut increased = BTreeSet::new();
        for eff in &a.effects {
            match &eff.kind {
                EffectKind::SetBool(_) => self.expect(context, eff.target, FluentKind::Boolean)?,
                EffectKind::Assign(e) | EffectKind::Increase(e) => {
                    self.expect(context, eff.target, FluentKind::Numeric)?;
                    self.num(context, e)?;
                }
            }
            let clash = if eff.is_assignment() {
                !assigned.insert(eff.target) || increased.contains(&eff.target)
            } else {
                increased.insert(eff.target);
                assigned.contains(&eff.target)
            };
            if clash {
                return Err(ModelError::ConflictingEffects {
                    context: context.to_string(),
                    fluent: self.fluents[eff.target.0].name.clone(),
                });
            }
        }
        Ok(())
    }

    fn process(&self, p: &Process) -> Result<(), ModelError> {
        self.formula(&p.name, &p.pre)?;
        for (target, rate) in &p.rates {
            self.expect(&p.name, *target, FluentKind::Numeric)?;
            self.num(&p.name, rate)?;
        }
        Ok(())
    }

    fn init(&self, init: &State) -> Result<(), ModelError> {
        if init.len() != self.fluents.len() {
            return Err(ModelError::InitSize { expected: self.fluents.len(), found: init.len() });
        }
        for (f, v) in self.fluents.iter().zip(init.values()) {
            if f.kind != v.kind() {
                return Err(ModelError::InitKind(f.name.clone()));
            }
        }
        Ok(())
    }
}

fn unique_names<'a>(names: impl Iterator<Item = &'a str>, err: fn(String) -> ModelError) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(err(n.to_string()));
        }
    }
    Ok(())
}

impl TemporalProblem {
    /// Checks closure, kinds, totality of the initial state, effect consistency
    /// and duration bounds.
    pub fn validate(&self) -> Result<(), ModelError> {
        unique_names(self.fluents.iter().map(|f| f.name.as_str()), ModelError::DuplicateFluent)?;
        unique_names(
            self.instant_actions.iter().map(|a| a.name.as_str()).chain(self.durative_actions.iter().map(|a| a.name.as_str())),
            ModelError::DuplicateAction,
        )?;
        let check = Checker::new(&self.fluents);
        check.init(&self.init)?;
        check.formula("goal", &self.goal)?;
        for a in &self.instant_actions {
            check.action(a)?;
        }
        for a in &self.durative_actions {
            if !a.lower.is_positive() || a.lower > a.upper {
                return Err(ModelError::BadBounds {
                    name: a.name.clone(),
                    lower: format_rational(&a.lower),
                    upper: format_rational(&a.upper),
                });
            }
            check.action(&a.start)?;
            check.action(&a.end)?;
            check.formula(&a.name, &a.overall)?;
        }
        Ok(())
    }

    pub fn fluent_id(&self, name: &str) -> Option<FluentId> {
        self.fluents.iter().position(|f| f.name == name).map(FluentId)
    }

    pub fn fixed_actions(&self) -> impl Iterator<Item = &DurativeAction> {
        self.durative_actions.iter().filter(|a| a.is_fixed())
    }

    pub fn variable_actions(&self) -> impl Iterator<Item = &DurativeAction> {
        self.durative_actions.iter().filter(|a| !a.is_fixed())
    }

    pub fn action_index(&self) -> HashMap<&str, ActionRef> {
        let mut map = HashMap::new();
        for (i, a) in self.instant_actions.iter().enumerate() {
            map.insert(a.name.as_str(), ActionRef::Instant(i));
        }
        for (i, a) in self.durative_actions.iter().enumerate() {
            map.insert(a.name.as_str(), ActionRef::Durative(i));
        }
        map
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionRef {
    Instant(usize),
    Durative(usize),
}

impl PlusProblem {
    pub fn validate(&self) -> Result<(), ModelError> {
        unique_names(self.fluents.iter().map(|f| f.name.as_str()), ModelError::DuplicateFluent)?;
        unique_names(self.actions.iter().map(|a| a.name.as_str()), ModelError::DuplicateAction)?;
        let check = Checker::new(&self.fluents);
        check.init(&self.init)?;
        check.formula("goal", &self.goal)?;
        for a in self.actions.iter().chain(&self.events) {
            check.action(a)?;
        }
        for p in &self.processes {
            check.process(p)?;
        }
        Ok(())
    }

    pub fn fluent_id(&self, name: &str) -> Option<FluentId> {
        self.fluents.iter().position(|f| f.name == name).map(FluentId)
    }

    pub fn action_id(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn event_id(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|a| a.name == name)
    }
}
