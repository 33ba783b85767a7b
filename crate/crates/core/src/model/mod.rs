//! Ground data model shared by the compiler, validators, plan bridge and solver.

mod action;
mod expr;
pub mod number;
mod plan;
mod problem;
mod state;

pub use action::{DurativeAction, Effect, EffectKind, Event, InstantAction, Interference, Process};
pub use expr::{BinOp, CmpOp, EvalError, Formula, NumExpr};
pub use number::{format_rational, int, parse_rational, rat, Rational};
pub use plan::{PlanEntry, PlusPlan, PlusStep, TemporalPlan};
pub use problem::{ActionRef, ModelError, PlusProblem, TemporalProblem};
pub use state::{Fluent, FluentId, FluentKind, State, Value};
