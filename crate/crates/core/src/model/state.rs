use std::fmt;

use serde::{Deserialize, Serialize};

use super::number::{format_rational, Rational};

/// Index of a fluent in its problem's fluent table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FluentId(pub usize);

impl fmt::Display for FluentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluentKind {
    Boolean,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fluent {
    pub name: String,
    pub kind: FluentKind,
}

impl Fluent {
    pub fn boolean(name: impl Into<String>) -> Self {
        Fluent { name: name.into(), kind: FluentKind::Boolean }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Fluent { name: name.into(), kind: FluentKind::Numeric }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Num(Rational),
}

impl Value {
    pub fn kind(&self) -> FluentKind {
        match self {
            Value::Bool(_) => FluentKind::Boolean,
            Value::Num(_) => FluentKind::Numeric,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Num(_) => None,
        }
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Value::Num(n) => Some(n),
            Value::Bool(_) => None,
        }
    }

    pub fn default_for(kind: FluentKind) -> Value {
        match kind {
            FluentKind::Boolean => Value::Bool(false),
            FluentKind::Numeric => Value::Num(Rational::from_integer(0.into())),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("true"),
            Value::Bool(false) => f.write_str("false"),
            Value::Num(n) => f.write_str(&format_rational(n)),
        }
    }
}

/// Total assignment of values to the fluents of one problem, indexed by [`FluentId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct State(Vec<Value>);

impl State {
    pub fn new(values: Vec<Value>) -> Self {
        State(values)
    }

    /// Every fluent at its default (false / 0).
    pub fn defaults(fluents: &[Fluent]) -> Self {
        State(fluents.iter().map(|f| Value::default_for(f.kind)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: FluentId) -> &Value {
        &self.0[id.0]
    }

    pub fn try_get(&self, id: FluentId) -> Option<&Value> {
        self.0.get(id.0)
    }

    pub fn set(&mut self, id: FluentId, value: Value) {
        self.0[id.0] = value;
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn bool_of(&self, id: FluentId) -> Option<bool> {
        self.0.get(id.0).and_then(Value::as_bool)
    }

    pub fn num_of(&self, id: FluentId) -> Option<&Rational> {
        self.0.get(id.0).and_then(Value::as_num)
    }

    /// Restriction to the first `n` fluents.
    pub fn prefix(&self, n: usize) -> State {
        State(self.0[..n].to_vec())
    }

    /// Renders as `name -> value` pairs, for reports.
    pub fn named(&self, fluents: &[Fluent]) -> Vec<(String, String)> {
        fluents
            .iter()
            .zip(&self.0)
            .map(|(f, v)| (f.name.clone(), v.to_string()))
            .collect()
    }
}
