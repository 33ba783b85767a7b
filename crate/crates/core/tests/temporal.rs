mod common;

use common::{fixture, fixtures};
use tempo2plus::model::{int, PlanEntry, TemporalPlan};
use tempo2plus::temporal::{build_timeline, validate_temporal, validate_temporal_with, FailureKind, TemporalOptions};

fn expected_failure(fixture: &str, plan: &str) -> FailureKind {
    match (fixture, plan) {
        (_, "invalid-overlap.plan" | "invalid-restart.plan") => FailureKind::Condition(6),
        (_, "invalid-touching.plan" | "invalid-clash.plan" | "invalid-same-time.plan") => FailureKind::Condition(5),
        (_, "invalid-locked.plan" | "invalid-no-fuel.plan" | "invalid-too-early.plan") => FailureKind::Condition(2),
        (_, "invalid-too-long.plan" | "invalid-too-fast.plan") => FailureKind::Duration,
        _ => FailureKind::Condition(4),
    }
}

#[test]
fn hand_written_plans_get_the_expected_verdict() {
    let mut invalid = 0;
    for f in fixtures() {
        for (name, plan) in f.valid_plans() {
            let r = validate_temporal(&f.problem, &plan).unwrap();
            assert!(r.valid, "{}/{name}: {:?}", f.name, r.failure);
            assert_eq!(r.trace.len(), build_timeline(&f.problem, &plan).unwrap().steps() + 1);
        }
        for (name, plan) in f.invalid_plans() {
            let r = validate_temporal(&f.problem, &plan).unwrap();
            let failure = r.failure.unwrap_or_else(|| panic!("{}/{name} accepted", f.name));
            assert_eq!(failure.kind, expected_failure(&f.name, name.rsplit('/').next().unwrap()), "{}/{name}: {}", f.name, failure.detail);
            invalid += 1;
        }
    }
    assert_eq!(invalid, 15);
}

#[test]
fn unreached_goal_is_reported() {
    let f = fixture("match-done");
    let r = validate_temporal(&f.problem, &TemporalPlan::new()).unwrap();
    assert_eq!(r.failure.unwrap().kind, FailureKind::Condition(1));
}

#[test]
fn back_to_back_instances_need_the_lenient_reading() {
    let f = fixture("fill");
    let plan: TemporalPlan = [PlanEntry::new(int(0), "fill", int(2)), PlanEntry::new(int(2), "fill", int(2))].into_iter().collect();
    assert!(validate_temporal(&f.problem, &plan).unwrap().valid);
    let strict = TemporalOptions { strict_self_overlap: true, ..TemporalOptions::default() };
    let r = validate_temporal_with(&f.problem, &plan, &strict).unwrap();
    assert_eq!(r.failure.unwrap().kind, FailureKind::Condition(6));
}

#[test]
fn unknown_actions_are_errors_not_verdicts() {
    let f = fixture("fill");
    let plan: TemporalPlan = [PlanEntry::new(int(0), "nope", int(1))].into_iter().collect();
    assert!(validate_temporal(&f.problem, &plan).is_err());
}

#[test]
fn timeline_ends_one_past_the_last_happening() {
    let f = fixture("fill");
    let plan: TemporalPlan = [PlanEntry::new(int(1), "fill", int(2))].into_iter().collect();
    let t = build_timeline(&f.problem, &plan).unwrap();
    assert_eq!(t.times, vec![int(1), int(3), int(4)]);
    assert_eq!(t.start_step, vec![0]);
    assert_eq!(t.end_step, vec![Some(1)]);
}
