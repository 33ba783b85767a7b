mod common;

use common::fixture;

use tempo2plus::compiler::compile;
use tempo2plus::model::{
    int, rat, Effect, Fluent, FluentId, Formula, InstantAction, NumExpr, PlusPlan, PlusProblem, PlusStep, Process,
    State, Value,
};
use tempo2plus::plus::{validate_plus, Applicability, Phase, PlusError, PlusOptions};

fn flipper() -> PlusProblem {
    let p = FluentId(0);
    PlusProblem {
        domain_name: "d".into(),
        problem_name: "q".into(),
        fluents: vec![Fluent::boolean("p")],
        init: State::new(vec![Value::Bool(false)]),
        goal: Formula::True,
        actions: vec![],
        events: vec![
            InstantAction::new("on", Formula::not(Formula::Atom(p)), vec![Effect::set(p, true)]),
            InstantAction::new("off", Formula::Atom(p), vec![Effect::set(p, false)]),
        ],
        processes: vec![],
    }
}

fn tank() -> PlusProblem {
    let x = FluentId(0);
    PlusProblem {
        domain_name: "d".into(),
        problem_name: "q".into(),
        fluents: vec![Fluent::numeric("x")],
        init: State::new(vec![Value::Num(int(0))]),
        goal: Formula::compare(tempo2plus::model::CmpOp::Ge, NumExpr::fluent(x), NumExpr::constant(int(3))),
        actions: vec![],
        events: vec![],
        processes: vec![Process { name: "fill".into(), pre: Formula::True, rates: vec![(x, NumExpr::constant(rat(3, 2)))] }],
    }
}

#[test]
fn events_that_never_settle_diverge() {
    let r = validate_plus(&flipper(), &PlusPlan::new(vec![], int(1)), &PlusOptions::with_delta(int(1)));
    assert!(matches!(r, Err(PlusError::Divergence { step: 0, .. })), "{r:?}");
}

#[test]
fn processes_integrate_with_euler_steps() {
    let p = tank();
    let short = validate_plus(&p, &PlusPlan::new(vec![], int(1)), &PlusOptions::with_delta(rat(1, 2))).unwrap();
    assert!(!short.valid);
    assert_eq!(short.failure.unwrap().phase, Phase::Goal);
    assert_eq!(short.trace.states.last().unwrap().num_of(FluentId(0)), Some(&rat(3, 2)));
    let long = validate_plus(&p, &PlusPlan::new(vec![], int(2)), &PlusOptions::with_delta(rat(1, 2))).unwrap();
    assert!(long.valid);
    assert_eq!(long.steps, Some(4));
    assert_eq!(long.trace.states.len(), 5);
}

#[test]
fn ill_formed_plans_and_bad_quanta() {
    let p = tank();
    let off_grid = PlusPlan::new(vec![], rat(1, 3));
    let r = validate_plus(&p, &off_grid, &PlusOptions::with_delta(rat(1, 2))).unwrap();
    assert_eq!(r.failure.unwrap().phase, Phase::IllFormed);
    assert!(matches!(validate_plus(&p, &off_grid, &PlusOptions::with_delta(int(0))), Err(PlusError::NonPositiveDelta(_))));
    let unknown = PlusPlan::new(vec![PlusStep::new(int(0), "nope")], int(1));
    assert!(matches!(validate_plus(&p, &unknown, &PlusOptions::with_delta(int(1))), Err(PlusError::UnknownAction(_))));
    let unsorted = PlusPlan::new(vec![], int(-1));
    assert!(!validate_plus(&p, &unsorted, &PlusOptions::with_delta(int(1))).unwrap().valid);
}

#[test]
fn a_durative_action_left_running_is_rejected() {
    let f = fixture("match-done");
    let c = compile(&f.problem);
    let only_start = PlusPlan::new(vec![PlusStep::new(int(0), "start-match")], int(1));
    let r = validate_plus(&c.result, &only_start, &PlusOptions::with_delta(int(1))).unwrap();
    assert_eq!(r.failure.unwrap().phase, Phase::Goal);
    let done = PlusPlan::new(vec![PlusStep::new(int(0), "start-match")], int(3));
    assert!(validate_plus(&c.result, &done, &PlusOptions::with_delta(int(1))).unwrap().valid);
}

#[test]
fn at_step_head_applicability_is_stricter() {
    let (a, b) = (FluentId(0), FluentId(1));
    let p = PlusProblem {
        domain_name: "d".into(),
        problem_name: "q".into(),
        fluents: vec![Fluent::boolean("a"), Fluent::boolean("b")],
        init: State::new(vec![Value::Bool(false), Value::Bool(false)]),
        goal: Formula::Atom(b),
        actions: vec![
            InstantAction::new("make-a", Formula::True, vec![Effect::set(a, true)]),
            InstantAction::new("make-b", Formula::Atom(a), vec![Effect::set(b, true)]),
        ],
        events: vec![],
        processes: vec![],
    };
    let plan = PlusPlan::new(vec![PlusStep::new(int(0), "make-a"), PlusStep::new(int(0), "make-b")], int(1));
    let mut opts = PlusOptions::with_delta(int(1));
    assert!(validate_plus(&p, &plan, &opts).unwrap().valid);
    opts.applicability = Applicability::AtStepHead;
    let f = validate_plus(&p, &plan, &opts).unwrap().failure.unwrap();
    assert_eq!((f.phase, f.action.as_deref()), (Phase::Action, Some("make-b")));
}
