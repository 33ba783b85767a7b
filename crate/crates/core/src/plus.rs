//! Discretized PDDL+ semantics with time quantum δ: event completion,
//! superdense action sequences and Euler integration of processes.

use std::collections::HashSet;
use std::fmt;

use num_traits::{Signed, Zero};
use serde_json::json;
use thiserror::Error;

use crate::model::{
    format_rational, EvalError, Formula, InstantAction, PlusPlan, PlusProblem, Rational, State, Value,
};
use crate::pddl::print_formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlusError {
    #[error("time quantum must be positive, got {0}")]
    NonPositiveDelta(String),
    #[error("plan refers to unknown action `{0}`")]
    UnknownAction(String),
    #[error("event completion does not terminate at step {step} after {firings} firings (last event `{last}`)")]
    Divergence { step: usize, firings: usize, last: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Applicability {
    /// Each action is checked in the state reached just before it.
    #[default]
    Sequential,
    /// Every action of a step is checked in the event completion of the
    /// step's initial state (and must still be applicable in sequence).
    AtStepHead,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlusOptions {
    pub delta: Rational,
    pub applicability: Applicability,
    /// Maximum event firings in one event completion; default `4·|E|`.
    pub event_limit: Option<usize>,
}

impl PlusOptions {
    pub fn with_delta(delta: Rational) -> Self {
        PlusOptions { delta, applicability: Applicability::default(), event_limit: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    IllFormed,
    EventCompletion,
    Action,
    Integration,
    Goal,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::IllFormed => "ill-formed",
            Phase::EventCompletion => "event-completion",
            Phase::Action => "action",
            Phase::Integration => "integration",
            Phase::Goal => "goal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogKind {
    Event,
    Action,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub kind: LogKind,
    /// Index into `events` or `actions`.
    pub index: usize,
    pub name: String,
    /// Number of events applicable when this one was selected (1 for actions).
    pub alternatives: usize,
    pub state: State,
}

/// Superdense record of one step: `s̄_j`, every event firing and action
/// application with the state it produced, and `s̄^end_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepLog {
    pub start: State,
    pub entries: Vec<LogEntry>,
    pub end: Option<State>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteTrace {
    pub delta: Rational,
    /// `s̄_0 ..`; `m̄ + 1` states when the simulation ran to the end.
    pub states: Vec<State>,
    pub logs: Vec<StepLog>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlusFailure {
    pub phase: Phase,
    pub step: Option<usize>,
    pub time: Option<Rational>,
    pub action: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlusReport {
    pub valid: bool,
    pub delta: Rational,
    /// `m̄ = t_e / δ` for well-formed plans.
    pub steps: Option<usize>,
    pub failure: Option<PlusFailure>,
    pub trace: DiscreteTrace,
}

impl PlusReport {
    pub fn to_json(&self, p: &PlusProblem, with_trace: bool) -> serde_json::Value {
        let failure = self.failure.as_ref().map(|f| {
            json!({
                "phase": f.phase.to_string(),
                "step": f.step,
                "time": f.time.as_ref().map(format_rational),
                "action": f.action,
                "detail": f.detail,
            })
        });
        let mut out = json!({
            "schema": 1,
            "kind": "plus",
            "valid": self.valid,
            "delta": format_rational(&self.delta),
            "steps": self.steps,
            "failure": failure,
        });
        if with_trace {
            let named = |s: &State| -> serde_json::Value {
                s.named(&p.fluents).into_iter().map(|(k, v)| (k, json!(v))).collect::<serde_json::Map<_, _>>().into()
            };
            out["trace"] = self
                .trace
                .logs
                .iter()
                .enumerate()
                .map(|(j, log)| {
                    json!({
                        "step": j,
                        "time": format_rational(&(&self.delta * Rational::from_integer(j.into()))),
                        "state": named(&log.start),
                        "log": log.entries.iter().map(|e| json!({
                            "kind": match e.kind { LogKind::Event => "event", LogKind::Action => "action" },
                            "name": e.name,
                            "alternatives": e.alternatives,
                            "state": named(&e.state),
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
        }
        out
    }

    /// Every event firing in the trace, as `(step, name, state after)`.
    pub fn fired_events(&self) -> impl Iterator<Item = (usize, &LogEntry)> {
        self.trace
            .logs
            .iter()
            .enumerate()
            .flat_map(|(j, log)| log.entries.iter().filter(|e| e.kind == LogKind::Event).map(move |e| (j, e)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompletionError {
    Divergence { firings: usize, last: String },
    Evaluation { event: String, error: EvalError },
}

pub fn default_event_limit(p: &PlusProblem) -> usize {
    4 * p.events.len()
}

/// Fires the first applicable event (in priority order) until none applies.
/// Firings are appended to `log` when given. Exceeding `limit` firings, or
/// revisiting a state once more than `|E|` events have fired, is divergence.
pub fn event_completion(
    p: &PlusProblem,
    state: &State,
    limit: usize,
    mut log: Option<&mut Vec<LogEntry>>,
) -> Result<State, CompletionError> {
    let mut current = state.clone();
    let mut firings = 0usize;
    let mut seen: HashSet<State> = HashSet::new();
    loop {
        let mut chosen = None;
        let mut alternatives = 0;
        for (i, e) in p.events.iter().enumerate() {
            let applicable = e
                .is_applicable(&current)
                .map_err(|error| CompletionError::Evaluation { event: e.name.clone(), error })?;
            if applicable {
                alternatives += 1;
                if chosen.is_none() {
                    chosen = Some(i);
                }
                if log.is_none() {
                    break;
                }
            }
        }
        let Some(i) = chosen else { return Ok(current) };
        let e = &p.events[i];
        current = e.apply(&current).map_err(|error| CompletionError::Evaluation { event: e.name.clone(), error })?;
        firings += 1;
        if let Some(log) = log.as_deref_mut() {
            log.push(LogEntry { kind: LogKind::Event, index: i, name: e.name.clone(), alternatives, state: current.clone() });
        }
        if firings > limit {
            return Err(CompletionError::Divergence { firings, last: e.name.clone() });
        }
        if firings > p.events.len() && !seen.insert(current.clone()) {
            return Err(CompletionError::Divergence { firings, last: e.name.clone() });
        }
    }
}

/// `s'(x) = s(x) + Σ rate·δ` over the processes active in `s`; rates are
/// evaluated in `s` and booleans are copied.
pub fn integrate(p: &PlusProblem, state: &State, delta: &Rational) -> Result<State, (String, EvalError)> {
    let mut next = state.clone();
    for proc in &p.processes {
        if !proc.pre.holds(state).map_err(|e| (proc.name.clone(), e))? {
            continue;
        }
        for (target, rate) in &proc.rates {
            let r = rate.eval(state).map_err(|e| (proc.name.clone(), e))?;
            let current = next.num_of(*target).cloned().unwrap_or_else(Rational::zero);
            next.set(*target, Value::Num(current + r * delta));
        }
    }
    Ok(next)
}

/// The first top-level conjunct of `f` that is false in `s`, rendered.
pub fn first_false_conjunct(f: &Formula, s: &State, names: &[String]) -> Option<String> {
    f.conjuncts().into_iter().find(|c| !c.holds(s).unwrap_or(false)).map(|c| print_formula(c, names))
}

struct Sim<'a> {
    p: &'a PlusProblem,
    delta: Rational,
    names: Vec<String>,
    report: PlusReport,
}

impl Sim<'_> {
    fn time(&self, step: usize) -> Rational {
        &self.delta * Rational::from_integer(step.into())
    }

    fn fail(mut self, phase: Phase, step: Option<usize>, action: Option<String>, detail: String) -> PlusReport {
        self.report.valid = false;
        self.report.failure = Some(PlusFailure { phase, time: step.map(|j| self.time(j)), step, action, detail });
        self.report
    }

    fn complete(&mut self, step: usize, state: &State, limit: usize) -> Result<Result<State, (Phase, String)>, PlusError> {
        let log = &mut self.report.trace.logs[step].entries;
        match event_completion(self.p, state, limit, Some(log)) {
            Ok(s) => Ok(Ok(s)),
            Err(CompletionError::Divergence { firings, last }) => Err(PlusError::Divergence { step, firings, last }),
            Err(CompletionError::Evaluation { event, error }) => {
                Ok(Err((Phase::EventCompletion, format!("event `{event}`: {error}"))))
            }
        }
    }
}

fn quotient(t: &Rational, delta: &Rational) -> Option<usize> {
    let q = t / delta;
    if q.is_integer() && !q.is_negative() {
        q.to_integer().try_into().ok()
    } else {
        None
    }
}

pub fn validate_plus(p: &PlusProblem, plan: &PlusPlan, options: &PlusOptions) -> Result<PlusReport, PlusError> {
    let delta = options.delta.clone();
    if !delta.is_positive() {
        return Err(PlusError::NonPositiveDelta(format_rational(&delta)));
    }
    let mut indices = Vec::with_capacity(plan.steps.len());
    for s in &plan.steps {
        indices.push(p.action_id(&s.action).ok_or_else(|| PlusError::UnknownAction(s.action.clone()))?);
    }
    let limit = options.event_limit.unwrap_or_else(|| default_event_limit(p));
    let mut sim = Sim {
        p,
        delta: delta.clone(),
        names: p.fluents.iter().map(|f| f.name.clone()).collect(),
        report: PlusReport {
            valid: true,
            delta: delta.clone(),
            steps: None,
            failure: None,
            trace: DiscreteTrace { delta: delta.clone(), states: vec![p.init.clone()], logs: Vec::new() },
        },
    };

    // well-formedness
    let Some(m) = quotient(&plan.makespan, &delta) else {
        let detail = format!("makespan {} is not a multiple of δ = {}", format_rational(&plan.makespan), format_rational(&delta));
        return Ok(sim.fail(Phase::IllFormed, None, None, detail));
    };
    let mut step_of = Vec::with_capacity(plan.steps.len());
    for s in &plan.steps {
        match quotient(&s.time, &delta) {
            Some(j) if j <= m => step_of.push(j),
            Some(_) => {
                let detail = format!("action at {} after the makespan", format_rational(&s.time));
                return Ok(sim.fail(Phase::IllFormed, None, Some(s.action.clone()), detail));
            }
            None => {
                let detail = format!("time {} is not a multiple of δ = {}", format_rational(&s.time), format_rational(&delta));
                return Ok(sim.fail(Phase::IllFormed, None, Some(s.action.clone()), detail));
            }
        }
    }
    if !plan.is_sorted() {
        return Ok(sim.fail(Phase::IllFormed, None, None, "plan steps are not sorted by time".into()));
    }
    sim.report.steps = Some(m);

    let mut next_action = 0;
    for j in 0..=m {
        let start = sim.report.trace.states[j].clone();
        sim.report.trace.logs.push(StepLog { start: start.clone(), entries: Vec::new(), end: None });
        let mut state = match sim.complete(j, &start, limit)? {
            Ok(s) => s,
            Err((phase, detail)) => return Ok(sim.fail(phase, Some(j), None, detail)),
        };
        let head = state.clone();
        while next_action < plan.steps.len() && step_of[next_action] == j {
            let idx = indices[next_action];
            let a: &InstantAction = &p.actions[idx];
            let name = plan.steps[next_action].action.clone();
            next_action += 1;
            let checks: &[&State] = match options.applicability {
                Applicability::Sequential => &[&state],
                Applicability::AtStepHead => &[&head, &state],
            };
            for s in checks {
                match a.is_applicable(s) {
                    Ok(true) => {}
                    Ok(false) => {
                        let conjunct = first_false_conjunct(&a.pre, s, &sim.names).unwrap_or_default();
                        let detail = format!("`{name}` is not applicable: {conjunct} is false");
                        return Ok(sim.fail(Phase::Action, Some(j), Some(name), detail));
                    }
                    Err(e) => return Ok(sim.fail(Phase::Action, Some(j), Some(name), e.to_string())),
                }
            }
            state = match a.apply(&state) {
                Ok(s) => s,
                Err(e) => return Ok(sim.fail(Phase::Action, Some(j), Some(name), e.to_string())),
            };
            sim.report.trace.logs[j].entries.push(LogEntry {
                kind: LogKind::Action,
                index: idx,
                name: name.clone(),
                alternatives: 1,
                state: state.clone(),
            });
            state = match sim.complete(j, &state, limit)? {
                Ok(s) => s,
                Err((phase, detail)) => return Ok(sim.fail(phase, Some(j), Some(name), detail)),
            };
        }
        sim.report.trace.logs[j].end = Some(state.clone());
        if j == m {
            break;
        }
        match integrate(p, &state, &delta) {
            Ok(s) => sim.report.trace.states.push(s),
            Err((process, e)) => {
                return Ok(sim.fail(Phase::Integration, Some(j), None, format!("process `{process}`: {e}")));
            }
        }
    }

    let last = sim.report.trace.states[m].clone();
    match p.goal.holds(&last) {
        Ok(true) => Ok(sim.report),
        Ok(false) => {
            let conjunct = first_false_conjunct(&p.goal, &last, &sim.names).unwrap_or_default();
            Ok(sim.fail(Phase::Goal, Some(m), None, format!("goal is false at the makespan: {conjunct} is false")))
        }
        Err(e) => Ok(sim.fail(Phase::Goal, Some(m), None, e.to_string())),
    }
}
