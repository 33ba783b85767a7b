//! VAL-style plan files.
//!
//! Temporal plans: one `<time>: (<action> <args>) [<duration>]` per line, the
//! duration omitted for instantaneous actions. PDDL+ plans: `<time>: (<action>)`
//! lines plus a `;; makespan <t_e>` line. `;` starts a comment.

use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use super::PddlError;
use crate::model::{format_rational, parse_rational, PlanEntry, PlusPlan, PlusStep, Rational, TemporalPlan};

struct Line {
    time: Rational,
    action: String,
    duration: Option<Rational>,
}

fn plan_error(line: usize, message: impl Into<String>) -> PddlError {
    PddlError::Plan { line, message: message.into() }
}

fn parse_line(number: usize, text: &str) -> Result<Line, PddlError> {
    let (time, rest) = text
        .split_once(':')
        .ok_or_else(|| plan_error(number, format!("expected `<time>: (<action>)`, found `{text}`")))?;
    let time = parse_rational(time.trim())
        .filter(|t| !t.is_negative())
        .ok_or_else(|| plan_error(number, format!("bad time `{}`", time.trim())))?;
    let rest = rest.trim();
    let open = rest.strip_prefix('(').ok_or_else(|| plan_error(number, "expected `(` before the action"))?;
    let (inside, after) = open.split_once(')').ok_or_else(|| plan_error(number, "unclosed `(`"))?;
    let action = inside.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    if action.is_empty() {
        return Err(plan_error(number, "empty action"));
    }
    let after = after.trim();
    let duration = if after.is_empty() {
        None
    } else {
        let body = after
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| plan_error(number, format!("unexpected `{after}` after the action")))?;
        Some(
            parse_rational(body.trim())
                .filter(|d| !d.is_negative())
                .ok_or_else(|| plan_error(number, format!("bad duration `{}`", body.trim())))?,
        )
    };
    Ok(Line { time, action, duration })
}

fn strip_comment(text: &str) -> &str {
    text.split(';').next().unwrap_or("").trim()
}

pub fn parse_temporal_plan(text: &str) -> Result<TemporalPlan, PddlError> {
    let mut plan = TemporalPlan::new();
    for (i, raw) in text.lines().enumerate() {
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let line = parse_line(i + 1, body)?;
        plan.insert(PlanEntry::new(line.time, line.action, line.duration.unwrap_or_else(Rational::zero)));
    }
    Ok(plan)
}

pub fn print_temporal_plan(plan: &TemporalPlan) -> String {
    let mut out = String::new();
    for e in plan.iter() {
        let _ = write!(out, "{}: ({})", format_rational(&e.time), e.action);
        if !e.duration.is_zero() {
            let _ = write!(out, " [{}]", format_rational(&e.duration));
        }
        out.push('\n');
    }
    out
}

pub fn parse_plus_plan(text: &str) -> Result<PlusPlan, PddlError> {
    let mut steps = Vec::new();
    let mut makespan = None;
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if let Some(value) = trimmed.strip_prefix(";;").map(str::trim).and_then(|r| r.strip_prefix("makespan")) {
            let t = parse_rational(value.trim())
                .filter(|t| !t.is_negative())
                .ok_or_else(|| plan_error(i + 1, format!("bad makespan `{}`", value.trim())))?;
            makespan = Some(t);
            continue;
        }
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let line = parse_line(i + 1, body)?;
        if line.duration.as_ref().is_some_and(|d| !d.is_zero()) {
            return Err(plan_error(i + 1, "PDDL+ plan steps carry no duration"));
        }
        steps.push(PlusStep::new(line.time, line.action));
    }
    let makespan = makespan.ok_or_else(|| plan_error(text.lines().count().max(1), "missing `;; makespan <t>` line"))?;
    // keeps the file order among equal times
    steps.sort_by(|a: &PlusStep, b: &PlusStep| a.time.cmp(&b.time));
    Ok(PlusPlan::new(steps, makespan))
}

pub fn print_plus_plan(plan: &PlusPlan) -> String {
    let mut steps: Vec<&PlusStep> = plan.steps.iter().collect();
    steps.sort_by(|a, b| a.time.cmp(&b.time));
    let mut out = String::new();
    for s in steps {
        let _ = writeln!(out, "{}: ({})", format_rational(&s.time), s.action);
    }
    let _ = writeln!(out, ";; makespan {}", format_rational(&plan.makespan));
    out
}
