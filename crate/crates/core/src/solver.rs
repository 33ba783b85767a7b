//! Exhaustive bounded search over the discretized PDDL+ semantics.
//!
//! Breadth-first by step count; within a step every sequence of distinct
//! applicable actions (each followed by event completion) is tried before the
//! step is closed by process integration. Plans are found in order of
//! (makespan, number of actions).

use std::collections::{HashMap, HashSet, VecDeque};
use std::time::Instant;

use num_traits::Signed;
use serde_json::json;
use thiserror::Error;

use crate::model::{format_rational, PlusPlan, PlusProblem, PlusStep, Rational, State};
use crate::plus::{
    default_event_limit, event_completion, integrate, validate_plus, CompletionError, PlusError, PlusOptions,
};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;
pub const NODE_BUDGET_ENV: &str = "TEMPO2PLUS_NODE_BUDGET";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub delta: Rational,
    /// Largest makespan tried, in steps of δ.
    pub horizon: usize,
    /// Cap on actions within one step; default: every action at most once.
    pub max_actions_per_step: Option<usize>,
    /// Cap on generated search nodes.
    pub node_budget: usize,
}

impl SolveOptions {
    pub fn new(delta: Rational, horizon: usize) -> Self {
        SolveOptions { delta, horizon, max_actions_per_step: None, node_budget: node_budget_from_env() }
    }
}

/// `TEMPO2PLUS_NODE_BUDGET` when set to a number, else the default.
pub fn node_budget_from_env() -> usize {
    std::env::var(NODE_BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_NODE_BUDGET)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Found(PlusPlan),
    /// No valid plan exists within the horizon and per-step bound.
    Exhausted,
    BudgetExceeded,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: usize,
    pub duplicates: usize,
    pub layers: usize,
    pub millis: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub result: SolveResult,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        let (status, plan) = match &self.result {
            SolveResult::Found(p) => ("found", Some(p)),
            SolveResult::Exhausted => ("exhausted", None),
            SolveResult::BudgetExceeded => ("budget-exceeded", None),
        };
        json!({
            "schema": 1,
            "kind": "solve",
            "status": status,
            "makespan": plan.map(|p| format_rational(&p.makespan)),
            "actions": plan.map(|p| p.len()),
            "stats": {
                "nodes": self.stats.nodes,
                "duplicates": self.stats.duplicates,
                "layers": self.stats.layers,
                "wall_time_ms": self.stats.millis,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Plus(#[from] PlusError),
    #[error("internal error: solver produced a plan the validator rejects: {0}")]
    Unsound(String),
}

/// A raw (post-integration) state reached after `step` steps.
struct Node {
    parent: Option<usize>,
    /// Actions applied in the step leading here from `parent`.
    actions: Vec<usize>,
    total_actions: usize,
}

struct Search<'a> {
    p: &'a PlusProblem,
    options: &'a SolveOptions,
    limit: usize,
    stats: SolveStats,
}

enum Stop {
    Budget,
    /// An event guard could not be evaluated; the branch is discarded.
    Dead,
    Error(PlusError),
}

impl Search<'_> {
    fn complete(&self, s: &State, step: usize) -> Result<State, Stop> {
        match event_completion(self.p, s, self.limit, None) {
            Ok(s) => Ok(s),
            Err(CompletionError::Divergence { firings, last }) => {
                Err(Stop::Error(PlusError::Divergence { step, firings, last }))
            }
            Err(CompletionError::Evaluation { .. }) => Err(Stop::Dead),
        }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.stats.nodes += 1;
        if self.stats.nodes > self.options.node_budget {
            Err(Stop::Budget)
        } else {
            Ok(())
        }
    }

    /// Every superdense end state reachable from `raw` within one step, with
    /// the action sequence producing it, fewest actions first.
    fn step_closures(&mut self, raw: &State, step: usize) -> Result<Vec<(State, Vec<usize>)>, Stop> {
        let head = match self.complete(raw, step) {
            Err(Stop::Dead) => return Ok(Vec::new()),
            other => other?,
        };
        let per_step = self.options.max_actions_per_step.unwrap_or(self.p.actions.len());
        let mut out = Vec::new();
        let mut seen: HashSet<(State, Vec<usize>)> = HashSet::new();
        let mut queue: VecDeque<(State, Vec<usize>)> = VecDeque::new();
        queue.push_back((head, Vec::new()));
        while let Some((state, seq)) = queue.pop_front() {
            self.tick()?;
            if seq.len() < per_step {
                for (i, a) in self.p.actions.iter().enumerate() {
                    if seq.contains(&i) || !a.is_applicable(&state).unwrap_or(false) {
                        continue;
                    }
                    let Ok(next) = a.apply(&state) else { continue };
                    let next = match self.complete(&next, step) {
                        Ok(s) => s,
                        Err(Stop::Dead) => continue,
                        Err(e) => return Err(e),
                    };
                    let mut used = seq.clone();
                    used.push(i);
                    let mut key_used = used.clone();
                    key_used.sort_unstable();
                    if seen.insert((next.clone(), key_used)) {
                        queue.push_back((next, used));
                    } else {
                        self.stats.duplicates += 1;
                    }
                }
            }
            out.push((state, seq));
        }
        Ok(out)
    }

    fn run(&mut self) -> Result<Option<PlusPlan>, Stop> {
        let mut arena: Vec<Node> = vec![Node { parent: None, actions: Vec::new(), total_actions: 0 }];
        let mut seen: HashSet<State> = HashSet::new();
        seen.insert(self.p.init.clone());
        let mut layer: Vec<(State, usize)> = vec![(self.p.init.clone(), 0)];
        for step in 0..=self.options.horizon {
            self.stats.layers = step + 1;
            // cheapest goal state of this layer
            let best = layer
                .iter()
                .filter(|(s, _)| self.p.goal.holds(s).unwrap_or(false))
                .min_by_key(|(_, id)| arena[*id].total_actions);
            if let Some((_, id)) = best {
                return Ok(Some(self.reconstruct(&arena, *id, step)));
            }
            if step == self.options.horizon || layer.is_empty() {
                break;
            }
            let mut next: HashMap<State, usize> = HashMap::new();
            let mut order: Vec<State> = Vec::new();
            for (raw, id) in &layer {
                for (end, seq) in self.step_closures(raw, step)? {
                    let Ok(after) = integrate(self.p, &end, &self.options.delta) else { continue };
                    if seen.contains(&after) {
                        self.stats.duplicates += 1;
                        continue;
                    }
                    let total = arena[*id].total_actions + seq.len();
                    match next.get(&after) {
                        Some(&existing) if arena[existing].total_actions <= total => {
                            self.stats.duplicates += 1;
                        }
                        Some(&existing) => {
                            arena[existing] = Node { parent: Some(*id), actions: seq, total_actions: total };
                        }
                        None => {
                            next.insert(after.clone(), arena.len());
                            order.push(after);
                            arena.push(Node { parent: Some(*id), actions: seq, total_actions: total });
                        }
                    }
                }
            }
            layer = order
                .into_iter()
                .map(|s| {
                    let id = next[&s];
                    seen.insert(s.clone());
                    (s, id)
                })
                .collect();
        }
        Ok(None)
    }

    fn reconstruct(&self, arena: &[Node], mut id: usize, steps: usize) -> PlusPlan {
        let mut per_step: Vec<&[usize]> = Vec::new();
        while let Some(parent) = arena[id].parent {
            per_step.push(&arena[id].actions);
            id = parent;
        }
        per_step.reverse();
        let mut plan = Vec::new();
        for (j, actions) in per_step.into_iter().enumerate() {
            let time = &self.options.delta * Rational::from_integer(j.into());
            for &a in actions {
                plan.push(PlusStep::new(time.clone(), self.p.actions[a].name.clone()));
            }
        }
        PlusPlan::new(plan, &self.options.delta * Rational::from_integer(steps.into()))
    }
}

pub fn solve(p: &PlusProblem, options: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    if !options.delta.is_positive() {
        return Err(PlusError::NonPositiveDelta(format_rational(&options.delta)).into());
    }
    let started = Instant::now();
    let mut search = Search { p, options, limit: default_event_limit(p), stats: SolveStats::default() };
    let result = match search.run() {
        Ok(Some(plan)) => {
            let report = validate_plus(p, &plan, &PlusOptions::with_delta(options.delta.clone()))?;
            if !report.valid {
                return Err(SolveError::Unsound(report.failure.map(|f| f.detail).unwrap_or_default()));
            }
            SolveResult::Found(plan)
        }
        Ok(None) => SolveResult::Exhausted,
        Err(Stop::Budget) => SolveResult::BudgetExceeded,
        Err(Stop::Dead) => SolveResult::Exhausted,
        Err(Stop::Error(e)) => return Err(e.into()),
    };
    let mut stats = search.stats;
    stats.millis = started.elapsed().as_millis();
    Ok(SolveOutcome { result, stats })
}
