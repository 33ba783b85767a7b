mod common;

use common::{fixture, fixtures};
use tempo2plus::compiler::{compile, compile_with, role_index, CompileOptions, FluentRole, Role};
use tempo2plus::model::{int, Value};

#[test]
fn compilation_is_deterministic() {
    for f in fixtures() {
        assert_eq!(compile(&f.problem), compile(&f.problem), "{}", f.name);
    }
}

#[test]
fn initial_state_of_the_compilation() {
    for f in fixtures() {
        let c = compile(&f.problem);
        let s = &c.result.init;
        assert_eq!(s.prefix(f.problem.fluents.len()), f.problem.init, "{}", f.name);
        assert_eq!(s.bool_of(c.ok), Some(true));
        assert_eq!(s.num_of(c.oc), Some(&int(0)));
        assert_eq!(s.num_of(c.gc), Some(&int(0)));
        for l in &c.locks {
            for id in [l.read, l.assign, l.increase] {
                assert_eq!(s.get(id), &Value::Bool(true));
            }
        }
        for (r, k) in c.running.iter().zip(&c.clock) {
            assert_eq!(s.bool_of(*r), Some(false));
            assert_eq!(s.num_of(*k), Some(&int(0)));
        }
    }
}

#[test]
fn roles_cover_every_compiled_element() {
    let f = fixture("hold");
    let c = compile(&f.problem);
    let roles = role_index(&c);
    let names = |r: Role| {
        let mut v: Vec<_> = roles.iter().filter(|(_, x)| **x == r).map(|(n, _)| n.as_str()).collect();
        v.sort();
        v
    };
    assert_eq!(names(Role::Start), ["start-hold"]);
    assert_eq!(names(Role::EndVar), ["end-hold"]);
    assert_eq!(names(Role::ExpireEvent).len(), 1);
    assert_eq!(names(Role::OverallEvent).len(), 1);
    assert_eq!(names(Role::LockResetEvent).len(), 1);
    assert_eq!(names(Role::ClockProcess).len(), 1);
    assert_eq!(names(Role::GcProcess).len(), 1);
    assert!(names(Role::EndFixEvent).is_empty());
    let total = c.result.actions.len() + c.result.events.len() + c.result.processes.len();
    assert_eq!(roles.len(), total);
}

#[test]
fn fixed_durations_end_by_event() {
    let f = fixture("match");
    let c = compile(&f.problem);
    assert!(c.end_action[0].is_none());
    let e = c.end_event[0].expect("end event");
    assert_eq!(c.event_origin[e].role, Role::EndFixEvent);
    assert!(c.expire_event[0].is_none());
}

#[test]
fn expire_events_can_be_left_out() {
    let f = fixture("hold");
    let with = compile(&f.problem);
    let without = compile_with(&f.problem, &CompileOptions { expire_events: false });
    assert_eq!(without.result.events.len() + 1, with.result.events.len());
    assert!(without.expire_event.iter().all(Option::is_none));
    assert!(without.elements().iter().all(|e| e.role != Role::ExpireEvent));
}

#[test]
fn name_map_lists_introduced_fluents() {
    let f = fixture("fill");
    let c = compile(&f.problem);
    let json = c.name_map_json();
    assert_eq!(json["schema"], 1);
    let roles: Vec<_> = c.fluent_roles.iter().map(|e| e.role).collect();
    for r in [FluentRole::Ok, FluentRole::OpenCount, FluentRole::GlobalClock, FluentRole::Running, FluentRole::Clock] {
        assert_eq!(roles.iter().filter(|x| **x == r).count(), 1, "{r:?}");
    }
    assert_eq!(roles.iter().filter(|x| **x == FluentRole::ReadLock).count(), f.problem.fluents.len());
    let end = json["elements"].as_array().unwrap().iter().find(|e| e["role"] == "end-fix-event").unwrap();
    assert_eq!(end["source"], "fill");
    assert_eq!(end["kind"], "event");
}
