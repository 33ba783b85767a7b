//! Validation of temporal plans: happening timeline, induced state sequence
//! and the six validity conditions (goal, happening preconditions, effect
//! application, overall conditions, non-interference, non-self-overlap).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::model::{
    format_rational, ActionRef, EvalError, InstantAction, PlanEntry, Rational, State, TemporalPlan, TemporalProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SnapKind {
    Instant,
    Start,
    End,
}

impl SnapKind {
    pub fn label(self) -> &'static str {
        match self {
            SnapKind::Instant => "instant",
            SnapKind::Start => "start",
            SnapKind::End => "end",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Happening {
    /// Index into [`Timeline::entries`].
    pub entry: usize,
    pub action: ActionRef,
    pub kind: SnapKind,
}

/// Distinct happening times in increasing order followed by the extra final
/// time (last + 1, or 1 for an empty plan), and the happenings at each time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timeline {
    pub entries: Vec<PlanEntry>,
    pub times: Vec<Rational>,
    pub happenings: Vec<Vec<Happening>>,
    /// Step index of each entry's start and (durative only) end.
    pub start_step: Vec<usize>,
    pub end_step: Vec<Option<usize>>,
}

impl Timeline {
    /// Number of happening steps `m`; `times` has `m + 1` elements.
    pub fn steps(&self) -> usize {
        self.happenings.len()
    }

    pub fn final_time(&self) -> &Rational {
        self.times.last().expect("timeline always has a final time")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimelineError {
    #[error("plan refers to unknown action `{0}`")]
    UnknownAction(String),
}

pub fn build_timeline(p: &TemporalProblem, plan: &TemporalPlan) -> Result<Timeline, TimelineError> {
    let index = p.action_index();
    let entries: Vec<PlanEntry> = plan.iter().cloned().collect();
    let mut by_time: BTreeMap<Rational, Vec<Happening>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        let action = *index.get(e.action.as_str()).ok_or_else(|| TimelineError::UnknownAction(e.action.clone()))?;
        match action {
            ActionRef::Instant(_) => {
                by_time.entry(e.time.clone()).or_default().push(Happening { entry: i, action, kind: SnapKind::Instant })
            }
            ActionRef::Durative(_) => {
                by_time.entry(e.time.clone()).or_default().push(Happening { entry: i, action, kind: SnapKind::Start });
                by_time.entry(e.end()).or_default().push(Happening { entry: i, action, kind: SnapKind::End });
            }
        }
    }
    let mut times: Vec<Rational> = by_time.keys().cloned().collect();
    let final_time = times.last().map(|t| t + Rational::one()).unwrap_or_else(Rational::one);
    let mut happenings: Vec<Vec<Happening>> = by_time.into_values().collect();
    if happenings.is_empty() {
        times.push(Rational::zero());
        happenings.push(Vec::new());
    }
    times.push(final_time);
    let mut start_step = vec![0; entries.len()];
    let mut end_step = vec![None; entries.len()];
    for (j, hs) in happenings.iter_mut().enumerate() {
        hs.sort_by(|a, b| (a.kind, &entries[a.entry].action, a.entry).cmp(&(b.kind, &entries[b.entry].action, b.entry)));
        for h in hs.iter() {
            match h.kind {
                SnapKind::End => end_step[h.entry] = Some(j),
                _ => start_step[h.entry] = j,
            }
        }
    }
    Ok(Timeline { entries, times, happenings, start_step, end_step })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApplicationOrder {
    /// Instantaneous actions, then start snaps, then end snaps, each by name.
    #[default]
    Canonical,
    /// A seeded random permutation of each happening set.
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TemporalOptions {
    /// Also reject back-to-back instances of one action (`t_j = t_k + d_k`).
    pub strict_self_overlap: bool,
    pub order: ApplicationOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// A duration outside the action's bounds, or nonzero for an instantaneous action.
    Duration,
    /// One of the six validity conditions.
    Condition(u8),
    /// Division by zero while evaluating a formula or effect.
    Evaluation,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureKind::Duration => f.write_str("duration"),
            FailureKind::Condition(c) => write!(f, "condition {c}"),
            FailureKind::Evaluation => f.write_str("evaluation"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalFailure {
    pub kind: FailureKind,
    pub step: Option<usize>,
    pub time: Option<Rational>,
    /// Plan entries involved, as `(time, action, duration)`.
    pub entries: Vec<PlanEntry>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalReport {
    pub valid: bool,
    pub failure: Option<TemporalFailure>,
    /// Times of the states in `trace` (`t^s_0 .. t^s_m`).
    pub times: Vec<Rational>,
    /// `s_0 ..`; complete (m + 1 states) unless a step failed on the way.
    pub trace: Vec<State>,
}

impl TemporalReport {
    pub fn to_json(&self, p: &TemporalProblem, with_trace: bool) -> serde_json::Value {
        let failure = self.failure.as_ref().map(|f| {
            json!({
                "kind": match f.kind { FailureKind::Condition(_) => "condition", FailureKind::Duration => "duration", FailureKind::Evaluation => "evaluation" },
                "condition": match f.kind { FailureKind::Condition(c) => Some(c), _ => None },
                "step": f.step,
                "time": f.time.as_ref().map(format_rational),
                "actions": f.entries.iter().map(|e| json!({
                    "time": format_rational(&e.time),
                    "action": e.action,
                    "duration": format_rational(&e.duration),
                })).collect::<Vec<_>>(),
                "detail": f.detail,
            })
        });
        let mut out = json!({
            "schema": 1,
            "kind": "temporal",
            "valid": self.valid,
            "failure": failure,
        });
        if with_trace {
            out["trace"] = self
                .trace
                .iter()
                .zip(&self.times)
                .map(|(s, t)| {
                    let state: serde_json::Map<String, serde_json::Value> =
                        s.named(&p.fluents).into_iter().map(|(k, v)| (k, json!(v))).collect();
                    json!({ "time": format_rational(t), "state": state })
                })
                .collect();
        }
        out
    }
}

fn snap<'a>(p: &'a TemporalProblem, h: &Happening) -> &'a InstantAction {
    match (h.action, h.kind) {
        (ActionRef::Instant(i), _) => &p.instant_actions[i],
        (ActionRef::Durative(i), SnapKind::Start) => &p.durative_actions[i].start,
        (ActionRef::Durative(i), _) => &p.durative_actions[i].end,
    }
}

fn describe(h: &Happening, entries: &[PlanEntry]) -> String {
    let e = &entries[h.entry];
    match h.kind {
        SnapKind::Instant => format!("({})", e.action),
        k => format!("({}) {}", e.action, k.label()),
    }
}

struct Run<'a> {
    timeline: &'a Timeline,
    report: TemporalReport,
}

impl Run<'_> {
    fn fail(mut self, kind: FailureKind, step: Option<usize>, entries: Vec<usize>, detail: String) -> TemporalReport {
        self.report.valid = false;
        self.report.failure = Some(TemporalFailure {
            kind,
            time: step.map(|j| self.timeline.times[j].clone()),
            step,
            entries: entries.into_iter().map(|i| self.timeline.entries[i].clone()).collect(),
            detail,
        });
        self.report
    }

    fn eval_error(self, step: Option<usize>, entries: Vec<usize>, err: EvalError) -> TemporalReport {
        self.fail(FailureKind::Evaluation, step, entries, err.to_string())
    }
}

/// Validates `plan` for `p` with default options.
pub fn validate_temporal(p: &TemporalProblem, plan: &TemporalPlan) -> Result<TemporalReport, TimelineError> {
    validate_temporal_with(p, plan, &TemporalOptions::default())
}

pub fn validate_temporal_with(
    p: &TemporalProblem,
    plan: &TemporalPlan,
    options: &TemporalOptions,
) -> Result<TemporalReport, TimelineError> {
    let timeline = build_timeline(p, plan)?;
    Ok(check(p, &timeline, options))
}

fn check(p: &TemporalProblem, timeline: &Timeline, options: &TemporalOptions) -> TemporalReport {
    let mut run = Run {
        timeline,
        report: TemporalReport { valid: true, failure: None, times: timeline.times.clone(), trace: vec![p.init.clone()] },
    };

    for (i, e) in timeline.entries.iter().enumerate() {
        let bad = match p.action_index()[e.action.as_str()] {
            ActionRef::Instant(_) => (!e.duration.is_zero()).then(|| "instantaneous actions take duration 0".to_string()),
            ActionRef::Durative(k) => {
                let a = &p.durative_actions[k];
                (e.duration < a.lower || e.duration > a.upper).then(|| {
                    format!(
                        "duration {} outside [{}, {}]",
                        format_rational(&e.duration),
                        format_rational(&a.lower),
                        format_rational(&a.upper)
                    )
                })
            }
        };
        if let Some(detail) = bad {
            return run.fail(FailureKind::Duration, None, vec![i], detail);
        }
    }

    let mut rng = match options.order {
        ApplicationOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        ApplicationOrder::Canonical => None,
    };
    for (j, hs) in timeline.happenings.iter().enumerate() {
        // condition 5: no two happenings at one time interfere
        let sets: Vec<_> = hs.iter().map(|h| snap(p, h).interference()).collect();
        for x in 0..hs.len() {
            for y in x + 1..hs.len() {
                if sets[x].conflicts_with(&sets[y]) {
                    let detail = format!(
                        "{} and {} interfere at the same time",
                        describe(&hs[x], &timeline.entries),
                        describe(&hs[y], &timeline.entries)
                    );
                    return run.fail(FailureKind::Condition(5), Some(j), vec![hs[x].entry, hs[y].entry], detail);
                }
            }
        }
        // condition 2: every happening is applicable in s_j
        let state = run.report.trace[j].clone();
        for h in hs {
            match snap(p, h).is_applicable(&state) {
                Ok(true) => {}
                Ok(false) => {
                    let detail = format!("precondition of {} is false", describe(h, &timeline.entries));
                    return run.fail(FailureKind::Condition(2), Some(j), vec![h.entry], detail);
                }
                Err(err) => return run.eval_error(Some(j), vec![h.entry], err),
            }
        }
        // condition 3: s_{j+1} applies every happening
        let mut order: Vec<&Happening> = hs.iter().collect();
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        let mut next = state;
        for h in order {
            match snap(p, h).apply(&next) {
                Ok(s) => next = s,
                Err(err) => return run.eval_error(Some(j), vec![h.entry], err),
            }
        }
        run.report.trace.push(next);
    }

    // condition 4: γ holds in s_w for start < w <= end
    for (i, e) in timeline.entries.iter().enumerate() {
        let Some(k) = timeline.end_step[i] else { continue };
        let ActionRef::Durative(d) = p.action_index()[e.action.as_str()] else { continue };
        let overall = &p.durative_actions[d].overall;
        for w in timeline.start_step[i] + 1..=k {
            match overall.holds(&run.report.trace[w]) {
                Ok(true) => {}
                Ok(false) => {
                    let culprits: Vec<usize> = timeline.happenings[w - 1].iter().map(|h| h.entry).collect();
                    let detail = format!(
                        "overall condition of ({}) false at time {} (after the happenings at time {})",
                        e.action,
                        format_rational(&timeline.times[w]),
                        format_rational(&timeline.times[w - 1]),
                    );
                    let mut involved = vec![i];
                    involved.extend(culprits.into_iter().filter(|c| *c != i));
                    return run.fail(FailureKind::Condition(4), Some(w), involved, detail);
                }
                Err(err) => return run.eval_error(Some(w), vec![i], err),
            }
        }
    }

    // condition 6: instances of one durative action never overlap
    for x in 0..timeline.entries.len() {
        for y in x + 1..timeline.entries.len() {
            let (a, b) = (&timeline.entries[x], &timeline.entries[y]);
            if a.action != b.action || timeline.end_step[x].is_none() {
                continue;
            }
            let separated = if options.strict_self_overlap {
                a.time > b.end() || b.time > a.end()
            } else {
                a.time >= b.end() || b.time >= a.end()
            };
            if !separated {
                let detail = format!("two instances of ({}) overlap", a.action);
                return run.fail(FailureKind::Condition(6), None, vec![x, y], detail);
            }
        }
    }

    // condition 1: the goal holds in the final state
    let last = run.report.trace.len() - 1;
    match p.goal.holds(&run.report.trace[last]) {
        Ok(true) => run.report,
        Ok(false) => run.fail(FailureKind::Condition(1), Some(last), vec![], "goal is false in the final state".into()),
        Err(err) => run.eval_error(Some(last), vec![], err),
    }
}
