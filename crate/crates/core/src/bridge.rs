//! Plan translation between the temporal problem and its compilation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::json;
use thiserror::Error;

use crate::compiler::{CompilationArtifacts, Role};
use crate::model::{format_rational, ActionRef, PlanEntry, PlusPlan, PlusStep, Rational, TemporalPlan, TemporalProblem};
use crate::temporal::{build_timeline, validate_temporal, SnapKind, TimelineError};

/// A time quantum dividing every time of a plan's timeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaChoice {
    pub delta: Rational,
    /// Each input time with its (integral) quotient by `delta`.
    pub quotients: Vec<(Rational, BigInt)>,
}

impl DeltaChoice {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "delta": format_rational(&self.delta),
            "quotients": self.quotients.iter().map(|(t, q)| json!({
                "time": format_rational(t),
                "quotient": q.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// δ = gcd of the nonzero numerators / lcm of the denominators (times in
/// lowest terms); 1 when no time is nonzero.
pub fn select_delta<'a>(times: impl IntoIterator<Item = &'a Rational>) -> DeltaChoice {
    let times: Vec<Rational> = times.into_iter().cloned().collect();
    let mut gcd = BigInt::zero();
    let mut lcm = BigInt::one();
    for t in times.iter().filter(|t| !t.is_zero()) {
        gcd = gcd.gcd(t.numer());
        lcm = lcm.lcm(t.denom());
    }
    let delta = if gcd.is_zero() { Rational::one() } else { Rational::new(gcd.abs(), lcm) };
    let quotients = times
        .into_iter()
        .map(|t| {
            let q = &t / &delta;
            assert!(q.is_integer(), "δ = {} does not divide {}", format_rational(&delta), format_rational(&t));
            (t, q.to_integer())
        })
        .collect();
    DeltaChoice { delta, quotients }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("`{0}` is not an action of the compiled problem")]
    UnknownAction(String),
    #[error("start of `{action}` at {time} has no matching end")]
    UnmatchedStart { action: String, time: String },
}

/// Temporal plan read off a plan of the compiled problem: instantaneous
/// actions keep their time, fixed-duration starts get duration `lb`, and each
/// variable-duration start is paired with the first later end of the same
/// action that is not preceded by another start of it.
pub fn lift_plan(artifacts: &CompilationArtifacts, plan: &PlusPlan) -> Result<TemporalPlan, LiftError> {
    let source = &artifacts.source;
    let origins = plan
        .steps
        .iter()
        .map(|s| artifacts.action_by_name(&s.action).map(|(_, o)| o).ok_or_else(|| LiftError::UnknownAction(s.action.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = TemporalPlan::new();
    for (i, (step, origin)) in plan.steps.iter().zip(&origins).enumerate() {
        let Some(src) = origin.source else { continue };
        match origin.role {
            Role::Instant => {
                out.insert(PlanEntry::new(step.time.clone(), source.instant_actions[src].name.clone(), Rational::zero()));
            }
            Role::Start => {
                let a = &source.durative_actions[src];
                if a.is_fixed() {
                    out.insert(PlanEntry::new(step.time.clone(), a.name.clone(), a.lower.clone()));
                    continue;
                }
                let mut matched = None;
                for (later, o) in plan.steps.iter().zip(&origins).skip(i + 1) {
                    if o.source != Some(src) {
                        continue;
                    }
                    match o.role {
                        Role::Start => break,
                        Role::EndVar => {
                            matched = Some(&later.time - &step.time);
                            break;
                        }
                        _ => {}
                    }
                }
                let d = matched.ok_or_else(|| LiftError::UnmatchedStart {
                    action: a.name.clone(),
                    time: format_rational(&step.time),
                })?;
                out.insert(PlanEntry::new(step.time.clone(), a.name.clone(), d));
            }
            _ => {}
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lowered {
    pub plan: PlusPlan,
    pub delta: DeltaChoice,
    /// Whether the input plan passed temporal validation. Invalid plans are
    /// still lowered, which is useful for negative tests.
    pub source_valid: bool,
    pub warning: Option<String>,
}

/// PDDL+ plan for a temporal plan: every happening becomes the compiled
/// action at the same time (fixed-duration ends are left to their events),
/// the makespan is the final timeline time and δ divides every timeline time.
/// Within a time point, variable ends come first, then instantaneous actions,
/// then starts, each group ordered by name.
pub fn lower_plan(
    p: &TemporalProblem,
    artifacts: &CompilationArtifacts,
    plan: &TemporalPlan,
) -> Result<Lowered, TimelineError> {
    let timeline = build_timeline(p, plan)?;
    let report = validate_temporal(p, plan)?;
    let warning = report.failure.as_ref().map(|f| format!("input plan is invalid ({}): {}", f.kind, f.detail));
    let delta = select_delta(&timeline.times);

    let mut steps = Vec::new();
    for (j, hs) in timeline.happenings.iter().enumerate() {
        let mut here: Vec<(u8, &str, String)> = Vec::new();
        for h in hs {
            let name = match (h.action, h.kind) {
                (ActionRef::Instant(i), _) => Some((1, &artifacts.result.actions[artifacts.instant_action[i]].name)),
                (ActionRef::Durative(i), SnapKind::Start) => Some((2, &artifacts.result.actions[artifacts.start_action[i]].name)),
                (ActionRef::Durative(i), _) => artifacts.end_action[i].map(|k| (0, &artifacts.result.actions[k].name)),
            };
            if let Some((class, name)) = name {
                here.push((class, name, name.clone()));
            }
        }
        here.sort();
        here.dedup();
        steps.extend(here.into_iter().map(|(_, _, name)| PlusStep::new(timeline.times[j].clone(), name)));
    }
    let makespan = timeline.final_time().clone();
    Ok(Lowered { plan: PlusPlan::new(steps, makespan), delta, source_valid: report.valid, warning })
}
