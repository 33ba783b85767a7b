mod common;

use common::{fixture, fixtures};
use tempo2plus::bridge::{lift_plan, lower_plan, select_delta, LiftError};
use tempo2plus::compiler::compile;
use tempo2plus::model::{int, rat, PlanEntry, PlusPlan, PlusStep};
use tempo2plus::plus::{validate_plus, PlusOptions};

#[test]
fn delta_divides_every_time() {
    let times = [int(0), rat(3, 2), rat(9, 4), int(6)];
    let d = select_delta(&times);
    assert_eq!(d.delta, rat(3, 4));
    let q: Vec<i64> = d.quotients.iter().map(|(_, q)| q.try_into().unwrap()).collect();
    assert_eq!(q, [0, 2, 3, 8]);
    assert_eq!(select_delta(&[int(0)]).delta, int(1));
    assert_eq!(select_delta(&[rat(2, 3), rat(4, 3)]).delta, rat(2, 3));
}

#[test]
fn lowering_then_lifting_returns_the_plan() {
    for f in fixtures() {
        let c = compile(&f.problem);
        for (name, plan) in f.valid_plans() {
            let lowered = lower_plan(&f.problem, &c, &plan).unwrap();
            assert!(lowered.source_valid && lowered.warning.is_none(), "{name}");
            assert!(lowered.plan.is_sorted(), "{name}");
            assert_eq!(lift_plan(&c, &lowered.plan).unwrap(), plan, "{name}");
        }
    }
}

#[test]
fn simultaneous_happenings_put_ends_before_starts() {
    let f = fixture("fill");
    let c = compile(&f.problem);
    let (_, plan) = f.valid_plans().into_iter().find(|(n, _)| n.ends_with("twice.plan")).unwrap();
    let lowered = lower_plan(&f.problem, &c, &plan).unwrap();
    let names: Vec<_> = lowered.plan.steps.iter().map(|s| s.action.as_str()).collect();
    assert_eq!(names, ["start-fill", "start-fill"]);
    assert_eq!(lowered.plan.makespan, int(6));

    let h = fixture("hold");
    let c = compile(&h.problem);
    let (_, plan) = h.valid_plans().into_iter().find(|(n, _)| n.ends_with("fraction.plan")).unwrap();
    let lowered = lower_plan(&h.problem, &c, &plan).unwrap();
    assert_eq!(lowered.delta.delta, rat(1, 4));
    let names: Vec<_> = lowered.plan.steps.iter().map(|s| s.action.as_str()).collect();
    assert_eq!(names, ["start-hold", "end-hold"]);

    let back_to_back: tempo2plus::model::TemporalPlan =
        [PlanEntry::new(int(0), "hold", int(1)), PlanEntry::new(int(1), "hold", int(2))].into_iter().collect();
    let lowered = lower_plan(&h.problem, &c, &back_to_back).unwrap();
    assert!(lowered.source_valid);
    let steps: Vec<_> = lowered.plan.steps.iter().map(|s| (s.time.clone(), s.action.as_str())).collect();
    assert_eq!(steps, [(int(0), "start-hold"), (int(1), "end-hold"), (int(1), "start-hold"), (int(3), "end-hold")]);
    let report = validate_plus(&c.result, &lowered.plan, &PlusOptions::with_delta(int(1))).unwrap();
    assert!(report.valid, "{:?}", report.failure);
}

#[test]
fn lifting_rejects_dangling_starts_and_unknown_names() {
    let f = fixture("hold");
    let c = compile(&f.problem);
    let dangling = PlusPlan::new(vec![PlusStep::new(int(0), "start-hold")], int(3));
    assert!(matches!(lift_plan(&c, &dangling), Err(LiftError::UnmatchedStart { .. })));
    let unknown = PlusPlan::new(vec![PlusStep::new(int(0), "hold")], int(3));
    assert!(matches!(lift_plan(&c, &unknown), Err(LiftError::UnknownAction(_))));
    let restarted = PlusPlan::new(
        vec![PlusStep::new(int(0), "start-hold"), PlusStep::new(int(1), "start-hold"), PlusStep::new(int(2), "end-hold")],
        int(3),
    );
    assert!(matches!(lift_plan(&c, &restarted), Err(LiftError::UnmatchedStart { .. })));
}
