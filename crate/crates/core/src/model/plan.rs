use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::number::{serde_rational, Rational};

/// One `(t, a, d)` triple of a temporal plan.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlanEntry {
    #[serde(with = "serde_rational")]
    pub time: Rational,
    pub action: String,
    #[serde(with = "serde_rational")]
    pub duration: Rational,
}

impl PlanEntry {
    pub fn new(time: Rational, action: impl Into<String>, duration: Rational) -> Self {
        PlanEntry { time, action: action.into(), duration }
    }

    pub fn end(&self) -> Rational {
        &self.time + &self.duration
    }
}

/// A temporal plan is a set: inserting an identical triple twice keeps one.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TemporalPlan {
    pub entries: BTreeSet<PlanEntry>,
}

impl TemporalPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entry: PlanEntry) -> bool {
        self.entries.insert(entry)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PlanEntry> {
        self.entries.iter()
    }
}

impl FromIterator<PlanEntry> for TemporalPlan {
    fn from_iter<I: IntoIterator<Item = PlanEntry>>(iter: I) -> Self {
        TemporalPlan { entries: iter.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlusStep {
    #[serde(with = "serde_rational")]
    pub time: Rational,
    pub action: String,
}

impl PlusStep {
    pub fn new(time: Rational, action: impl Into<String>) -> Self {
        PlusStep { time, action: action.into() }
    }
}

/// PDDL+ plan `(π+, t_e)`: an ordered action sequence plus the makespan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlusPlan {
    pub steps: Vec<PlusStep>,
    #[serde(with = "serde_rational")]
    pub makespan: Rational,
}

impl PlusPlan {
    pub fn new(steps: Vec<PlusStep>, makespan: Rational) -> Self {
        PlusPlan { steps, makespan }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_sorted(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].time <= w[1].time)
    }
}
