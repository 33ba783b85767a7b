use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

use super::number::Rational;
use super::state::{FluentId, State, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NumExpr {
    Const(Rational),
    Fluent(FluentId),
    Binary(BinOp, Box<NumExpr>, Box<NumExpr>),
    Neg(Box<NumExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(FluentId),
    Compare(CmpOp, NumExpr, NumExpr),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero in {divisor:?}")]
    DivisionByZero { divisor: NumExpr },
    #[error("fluent {fluent} has the wrong kind for this use")]
    KindMismatch { fluent: FluentId },
    #[error("fluent {fluent} is not part of the state")]
    Undeclared { fluent: FluentId },
}

impl NumExpr {
    pub fn constant(value: Rational) -> Self {
        NumExpr::Const(value)
    }

    pub fn fluent(id: FluentId) -> Self {
        NumExpr::Fluent(id)
    }

    pub fn binary(op: BinOp, lhs: NumExpr, rhs: NumExpr) -> Self {
        NumExpr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn neg(inner: NumExpr) -> Self {
        NumExpr::Neg(Box::new(inner))
    }

    pub fn fluents_into(&self, out: &mut BTreeSet<FluentId>) {
        match self {
            NumExpr::Const(_) => {}
            NumExpr::Fluent(id) => {
                out.insert(*id);
            }
            NumExpr::Binary(_, a, b) => {
                a.fluents_into(out);
                b.fluents_into(out);
            }
            NumExpr::Neg(a) => a.fluents_into(out),
        }
    }

    pub fn fluents(&self) -> BTreeSet<FluentId> {
        let mut out = BTreeSet::new();
        self.fluents_into(&mut out);
        out
    }

    /// Value in `state`, with exact arithmetic.
    pub fn eval(&self, state: &State) -> Result<Rational, EvalError> {
        match self {
            NumExpr::Const(c) => Ok(c.clone()),
            NumExpr::Fluent(id) => match state.try_get(*id) {
                Some(Value::Num(n)) => Ok(n.clone()),
                Some(Value::Bool(_)) => Err(EvalError::KindMismatch { fluent: *id }),
                None => Err(EvalError::Undeclared { fluent: *id }),
            },
            NumExpr::Binary(op, a, b) => {
                let lhs = a.eval(state)?;
                let rhs = b.eval(state)?;
                Ok(match op {
                    BinOp::Add => lhs + rhs,
                    BinOp::Sub => lhs - rhs,
                    BinOp::Mul => lhs * rhs,
                    BinOp::Div => {
                        if rhs.is_zero() {
                            return Err(EvalError::DivisionByZero { divisor: (**b).clone() });
                        }
                        lhs / rhs
                    }
                })
            }
            NumExpr::Neg(a) => Ok(-a.eval(state)?),
        }
    }
}

impl Formula {
    /// Flattening conjunction: drops `True`, collapses to `False` on any `False`,
    /// returns the single conjunct or `True` when that is all that is left.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for part in parts {
            match part {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for part in parts {
            match part {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn not(inner: Formula) -> Formula {
        match inner {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(f) => *f,
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn compare(op: CmpOp, lhs: NumExpr, rhs: NumExpr) -> Formula {
        Formula::Compare(op, lhs, rhs)
    }

    pub fn fluents_into(&self, out: &mut BTreeSet<FluentId>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(id) => {
                out.insert(*id);
            }
            Formula::Compare(_, a, b) => {
                a.fluents_into(out);
                b.fluents_into(out);
            }
            Formula::And(parts) | Formula::Or(parts) => {
                for p in parts {
                    p.fluents_into(out);
                }
            }
            Formula::Not(f) => f.fluents_into(out),
        }
    }

    pub fn fluents(&self) -> BTreeSet<FluentId> {
        let mut out = BTreeSet::new();
        self.fluents_into(&mut out);
        out
    }

    /// Top-level conjuncts (the formula itself when it is not a conjunction).
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(parts) => parts.iter().collect(),
            Formula::True => Vec::new(),
            other => vec![other],
        }
    }

    /// Truth value in `state`. Conjunctions and disjunctions short-circuit left to right.
    pub fn holds(&self, state: &State) -> Result<bool, EvalError> {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom(id) => match state.try_get(*id) {
                Some(Value::Bool(b)) => Ok(*b),
                Some(Value::Num(_)) => Err(EvalError::KindMismatch { fluent: *id }),
                None => Err(EvalError::Undeclared { fluent: *id }),
            },
            Formula::Compare(op, a, b) => Ok(op.holds(&a.eval(state)?, &b.eval(state)?)),
            Formula::And(parts) => {
                for p in parts {
                    if !p.holds(state)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(parts) => {
                for p in parts {
                    if p.holds(state)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Not(f) => Ok(!f.holds(state)?),
        }
    }
}
