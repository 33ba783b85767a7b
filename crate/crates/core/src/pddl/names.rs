//! Deterministic mapping of arbitrary names onto legal PDDL identifiers.

use std::collections::{HashMap, HashSet};

const RESERVED: &[&str] = &[
    "and", "or", "not", "imply", "forall", "exists", "when", "at", "over", "start", "end", "all", "assign",
    "increase", "decrease", "scale-up", "scale-down", "define", "domain", "problem", "either", "object", "number",
    "preference", "total-time",
];

/// Legal form of a single name, ignoring collisions: lower case, whitespace
/// becomes `-`, other illegal characters become `_`, a leading non-letter gets
/// an `n` prefix and reserved words get a trailing `_`.
pub fn sanitize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.trim().chars().flat_map(char::to_lowercase) {
        if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
            out.push(c);
        } else if c.is_whitespace() {
            out.push('-');
        } else {
            out.push('_');
        }
    }
    if !out.starts_with(|c: char| c.is_ascii_alphabetic()) {
        out.insert(0, 'n');
    }
    if RESERVED.contains(&out.as_str()) {
        out.push('_');
    }
    out
}

/// Hands out sanitized names, suffixing `-2`, `-3`, ... when two different raw
/// names sanitize to the same identifier. Asking twice for the same raw name
/// returns the same answer.
#[derive(Debug, Clone, Default)]
pub struct NameRegistry {
    assigned: HashMap<String, String>,
    taken: HashSet<String>,
}

impl NameRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Marks `name` as used without binding it to a raw name.
    pub fn reserve(&mut self, name: &str) {
        self.taken.insert(name.to_string());
    }

    pub fn intern(&mut self, raw: &str) -> String {
        if let Some(done) = self.assigned.get(raw) {
            return done.clone();
        }
        let name = self.fresh(raw);
        self.assigned.insert(raw.to_string(), name.clone());
        name
    }

    /// A new identifier for `raw`, distinct from every name handed out so far
    /// even if `raw` itself was seen before.
    pub fn fresh(&mut self, raw: &str) -> String {
        let base = sanitize(raw);
        let mut candidate = base.clone();
        let mut k = 2;
        while self.taken.contains(&candidate) {
            candidate = format!("{base}-{k}");
            k += 1;
        }
        self.taken.insert(candidate.clone());
        candidate
    }
}
