//! PDDL front-end and back-end: a PDDL 2.1 level-3 subset (plus PDDL+
//! processes and events) read into a lifted AST and grounded; ground PDDL+
//! printing; VAL-style plan files.

mod ground;
mod lifted;
pub mod names;
mod plan_io;
mod print;
pub mod sexpr;

use thiserror::Error;

use crate::model::ModelError;
pub use sexpr::Span;

pub use ground::{ground_plus, ground_temporal};
pub use lifted::{
    parse_domain, parse_domain_problem, parse_problem, ActionSchema, Atom, Domain, DurativeSchema, InitFact, LEffect,
    LExpr, LFormula, ProblemSpec, ProcessSchema, Signature, Term, TypedName,
};
pub use plan_io::{parse_plus_plan, parse_temporal_plan, print_plus_plan, print_temporal_plan};
pub use print::{print_formula, print_num_expr, print_plus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddlError {
    #[error("syntax error at {span}: {message}")]
    Syntax { span: Span, message: String },
    #[error("unsupported feature `{feature}` at {span}")]
    Unsupported { span: Span, feature: String },
    #[error("type error at {span}: {message}")]
    Type { span: Span, message: String },
    #[error("grounding error: {0}")]
    Ground(String),
    #[error("plan line {line}: {message}")]
    Plan { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl PddlError {
    pub(crate) fn syntax(span: Span, message: impl Into<String>) -> Self {
        PddlError::Syntax { span, message: message.into() }
    }

    pub(crate) fn unsupported(span: Span, feature: impl Into<String>) -> Self {
        PddlError::Unsupported { span, feature: feature.into() }
    }

    pub(crate) fn type_error(span: Span, message: impl Into<String>) -> Self {
        PddlError::Type { span, message: message.into() }
    }
}

/// Parses and grounds a temporal (durative-action) domain/problem pair.
pub fn load_temporal(domain: &str, problem: &str) -> Result<crate::model::TemporalProblem, PddlError> {
    let (d, p) = parse_domain_problem(domain, problem)?;
    ground_temporal(&d, &p)
}

/// Parses and grounds a PDDL+ domain/problem pair.
pub fn load_plus(domain: &str, problem: &str) -> Result<crate::model::PlusProblem, PddlError> {
    let (d, p) = parse_domain_problem(domain, problem)?;
    ground_plus(&d, &p)
}
