use std::collections::BTreeSet;

use super::expr::{EvalError, Formula, NumExpr};
use super::number::Rational;
use super::state::{FluentId, State, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EffectKind {
    /// `f := ⊤` or `f := ⊥` on a boolean fluent.
    SetBool(bool),
    /// `f := e` on a numeric fluent.
    Assign(NumExpr),
    /// `f += e` on a numeric fluent.
    Increase(NumExpr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Effect {
    pub target: FluentId,
    pub kind: EffectKind,
}

impl Effect {
    pub fn set(target: FluentId, value: bool) -> Self {
        Effect { target, kind: EffectKind::SetBool(value) }
    }

    pub fn assign(target: FluentId, value: NumExpr) -> Self {
        Effect { target, kind: EffectKind::Assign(value) }
    }

    pub fn increase(target: FluentId, value: NumExpr) -> Self {
        Effect { target, kind: EffectKind::Increase(value) }
    }

    pub fn is_assignment(&self) -> bool {
        !matches!(self.kind, EffectKind::Increase(_))
    }

    pub fn rhs(&self) -> Option<&NumExpr> {
        match &self.kind {
            EffectKind::SetBool(_) => None,
            EffectKind::Assign(e) | EffectKind::Increase(e) => Some(e),
        }
    }
}

/// An instantaneous action; also the shape of snap actions and PDDL+ events.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InstantAction {
    pub name: String,
    pub pre: Formula,
    pub effects: Vec<Effect>,
}

pub type Event = InstantAction;

/// Read/assigned/increased fluents of an instantaneous action.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Interference {
    pub read: BTreeSet<FluentId>,
    pub assign: BTreeSet<FluentId>,
    pub increase: BTreeSet<FluentId>,
    pub write: BTreeSet<FluentId>,
}

impl Interference {
    /// Whether two happenings at the same time are mutually exclusive: one reads
    /// what the other writes, or one assigns what the other writes.
    pub fn conflicts_with(&self, other: &Interference) -> bool {
        !self.read.is_disjoint(&other.write)
            || !other.read.is_disjoint(&self.write)
            || !self.assign.is_disjoint(&other.write)
            || !other.assign.is_disjoint(&self.write)
    }
}

impl InstantAction {
    pub fn new(name: impl Into<String>, pre: Formula, effects: Vec<Effect>) -> Self {
        InstantAction { name: name.into(), pre, effects }
    }

    pub fn interference(&self) -> Interference {
        let mut sets = Interference::default();
        self.pre.fluents_into(&mut sets.read);
        for eff in &self.effects {
            if let Some(rhs) = eff.rhs() {
                rhs.fluents_into(&mut sets.read);
            }
            if eff.is_assignment() {
                sets.assign.insert(eff.target);
            } else {
                sets.increase.insert(eff.target);
            }
        }
        sets.write = sets.assign.union(&sets.increase).copied().collect();
        sets
    }

    pub fn is_applicable(&self, state: &State) -> Result<bool, EvalError> {
        self.pre.holds(state)
    }

    /// Successor state. Every right-hand side is evaluated in `state` before any
    /// write; increases on the same fluent accumulate.
    pub fn apply(&self, state: &State) -> Result<State, EvalError> {
        let mut pending: Vec<(FluentId, Pending)> = Vec::with_capacity(self.effects.len());
        for eff in &self.effects {
            let p = match &eff.kind {
                EffectKind::SetBool(b) => Pending::Set(Value::Bool(*b)),
                EffectKind::Assign(e) => Pending::Set(Value::Num(e.eval(state)?)),
                EffectKind::Increase(e) => Pending::Add(e.eval(state)?),
            };
            pending.push((eff.target, p));
        }
        let mut next = state.clone();
        for (target, p) in pending {
            match p {
                Pending::Set(v) => next.set(target, v),
                Pending::Add(delta) => {
                    let current = next
                        .num_of(target)
                        .ok_or(EvalError::KindMismatch { fluent: target })?
                        .clone();
                    next.set(target, Value::Num(current + delta));
                }
            }
        }
        Ok(next)
    }
}

enum Pending {
    Set(Value),
    Add(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DurativeAction {
    pub name: String,
    pub lower: Rational,
    pub upper: Rational,
    pub start: InstantAction,
    pub end: InstantAction,
    pub overall: Formula,
}

impl DurativeAction {
    pub fn is_fixed(&self) -> bool {
        self.lower == self.upper
    }
}

/// A PDDL+ process: while `pre` holds each `(x, e)` contributes `dx/dt += e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Process {
    pub name: String,
    pub pre: Formula,
    pub rates: Vec<(FluentId, NumExpr)>,
}
