//! Temporal problem → PDDL+ problem.
//!
//! Durative actions become a start action, a clock process and either an end
//! action (variable duration) or an end event (fixed duration). Three lock
//! fluents per source fluent make interfering happenings at one time point
//! mutually exclusive; `ok` records any violation for good and `oc` counts
//! running actions. The `gc` gauge grows with time and triggers the event
//! that releases every lock at the start of each new time point.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::model::{
    int, CmpOp, DurativeAction, Effect, Fluent, FluentId, Formula, InstantAction, NumExpr, PlusProblem, Process,
    State, TemporalProblem, Value,
};
use crate::pddl::names::NameRegistry;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileOptions {
    /// Emit the events that abort plans leaving a variable-duration action
    /// running beyond its upper bound. They prune search but are not needed
    /// for correctness.
    pub expire_events: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { expire_events: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Instant,
    Start,
    EndVar,
    EndFixEvent,
    OverallEvent,
    ExpireEvent,
    LockResetEvent,
    ClockProcess,
    GcProcess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementKind {
    Action,
    Event,
    Process,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluentRole {
    Source,
    Ok,
    OpenCount,
    GlobalClock,
    Running,
    Clock,
    ReadLock,
    AssignLock,
    IncreaseLock,
}

/// Where a compiled action, event or process comes from. `source` indexes
/// `instant_actions` for [`Role::Instant`], `durative_actions` for the
/// durative roles, and is `None` for the lock-reset event and gc process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Origin {
    pub role: Role,
    pub source: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementEntry {
    pub name: String,
    pub kind: ElementKind,
    pub role: Role,
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FluentEntry {
    pub name: String,
    pub role: FluentRole,
    pub source: Option<String>,
}

/// Lock fluents of one source fluent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Locks {
    pub read: FluentId,
    pub assign: FluentId,
    pub increase: FluentId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompilationArtifacts {
    pub result: PlusProblem,
    pub source: TemporalProblem,
    pub options: CompileOptions,
    pub ok: FluentId,
    pub oc: FluentId,
    pub gc: FluentId,
    /// Per durative action.
    pub running: Vec<FluentId>,
    pub clock: Vec<FluentId>,
    /// Per source fluent; source fluents keep their ids in the result.
    pub locks: Vec<Locks>,
    pub action_origin: Vec<Origin>,
    pub event_origin: Vec<Origin>,
    pub process_origin: Vec<Origin>,
    /// Index of the compiled action for each source instantaneous action.
    pub instant_action: Vec<usize>,
    pub start_action: Vec<usize>,
    pub end_action: Vec<Option<usize>>,
    pub end_event: Vec<Option<usize>>,
    pub overall_event: Vec<usize>,
    pub expire_event: Vec<Option<usize>>,
    pub lightning_event: usize,
    pub fluent_roles: Vec<FluentEntry>,
}

impl CompilationArtifacts {
    pub fn action_by_name(&self, name: &str) -> Option<(usize, Origin)> {
        let i = self.result.action_id(name)?;
        Some((i, self.action_origin[i]))
    }

    pub fn elements(&self) -> Vec<ElementEntry> {
        let source_name = |o: &Origin| {
            o.source.map(|i| match o.role {
                Role::Instant => self.source.instant_actions[i].name.clone(),
                _ => self.source.durative_actions[i].name.clone(),
            })
        };
        let mut out = Vec::new();
        for (a, o) in self.result.actions.iter().zip(&self.action_origin) {
            out.push(ElementEntry { name: a.name.clone(), kind: ElementKind::Action, role: o.role, source: source_name(o) });
        }
        for (e, o) in self.result.events.iter().zip(&self.event_origin) {
            out.push(ElementEntry { name: e.name.clone(), kind: ElementKind::Event, role: o.role, source: source_name(o) });
        }
        for (p, o) in self.result.processes.iter().zip(&self.process_origin) {
            out.push(ElementEntry { name: p.name.clone(), kind: ElementKind::Process, role: o.role, source: source_name(o) });
        }
        out
    }

    /// Name map as JSON: compiled elements and introduced fluents with roles.
    pub fn name_map_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": 1,
            "elements": self.elements(),
            "fluents": self.fluent_roles,
        })
    }

    /// Compiled name of each source fluent.
    pub fn source_fluent_name(&self, id: FluentId) -> &str {
        &self.result.fluents[id.0].name
    }
}

/// `⋀_{f∈read}(alock ∧ ilock) ∧ ⋀_{f∈assign}(rlock ∧ ilock ∧ alock) ∧ ⋀_{f∈increase}(rlock ∧ alock)`,
/// one conjunct per distinct lock fluent.
pub fn lock_precondition(a: &InstantAction, locks: &[Locks]) -> Formula {
    let sets = a.interference();
    let touched: BTreeSet<FluentId> = sets.read.iter().chain(&sets.write).copied().collect();
    let mut conjuncts = Vec::new();
    for f in touched {
        let l = locks[f.0];
        let read = sets.read.contains(&f);
        let assign = sets.assign.contains(&f);
        let increase = sets.increase.contains(&f);
        if assign || increase {
            conjuncts.push(Formula::Atom(l.read));
        }
        conjuncts.push(Formula::Atom(l.assign));
        if read || assign {
            conjuncts.push(Formula::Atom(l.increase));
        }
    }
    Formula::and(conjuncts)
}

/// `{alock := ⊥ | assign} ∪ {ilock := ⊥ | increase} ∪ {rlock := ⊥ | read}`.
pub fn lock_effects(a: &InstantAction, locks: &[Locks]) -> Vec<Effect> {
    let sets = a.interference();
    let mut out: Vec<Effect> = Vec::new();
    out.extend(sets.assign.iter().map(|f| Effect::set(locks[f.0].assign, false)));
    out.extend(sets.increase.iter().map(|f| Effect::set(locks[f.0].increase, false)));
    out.extend(sets.read.iter().map(|f| Effect::set(locks[f.0].read, false)));
    out
}

fn var(id: FluentId) -> NumExpr {
    NumExpr::fluent(id)
}

fn cmp(op: CmpOp, id: FluentId, value: &crate::model::Rational) -> Formula {
    Formula::compare(op, var(id), NumExpr::constant(value.clone()))
}

struct Builder<'a> {
    source: &'a TemporalProblem,
    fluents: Vec<Fluent>,
    roles: Vec<FluentEntry>,
    fluent_names: NameRegistry,
    op_names: NameRegistry,
}

impl Builder<'_> {
    fn add_fluent(&mut self, raw: &str, numeric: bool, role: FluentRole, source: Option<String>) -> FluentId {
        let name = self.fluent_names.fresh(raw);
        let id = FluentId(self.fluents.len());
        self.fluents.push(if numeric { Fluent::numeric(&name) } else { Fluent::boolean(&name) });
        self.roles.push(FluentEntry { name, role, source });
        id
    }

    fn op_name(&mut self, raw: &str) -> String {
        self.op_names.fresh(raw)
    }
}

pub fn compile(p: &TemporalProblem) -> CompilationArtifacts {
    compile_with(p, &CompileOptions::default())
}

pub fn compile_with(p: &TemporalProblem, options: &CompileOptions) -> CompilationArtifacts {
    let mut b = Builder {
        source: p,
        fluents: Vec::new(),
        roles: Vec::new(),
        fluent_names: NameRegistry::new(),
        op_names: NameRegistry::new(),
    };
    for f in &p.fluents {
        b.add_fluent(&f.name, f.kind == crate::model::FluentKind::Numeric, FluentRole::Source, Some(f.name.clone()));
    }
    let ok = b.add_fluent("ok", false, FluentRole::Ok, None);
    let oc = b.add_fluent("oc", true, FluentRole::OpenCount, None);
    let gc = b.add_fluent("gc", true, FluentRole::GlobalClock, None);
    let running: Vec<FluentId> = p
        .durative_actions
        .iter()
        .map(|a| b.add_fluent(&format!("running-{}", a.name), false, FluentRole::Running, Some(a.name.clone())))
        .collect();
    let clock: Vec<FluentId> = p
        .durative_actions
        .iter()
        .map(|a| b.add_fluent(&format!("clock-{}", a.name), true, FluentRole::Clock, Some(a.name.clone())))
        .collect();
    let families = [("rlock", FluentRole::ReadLock), ("alock", FluentRole::AssignLock), ("ilock", FluentRole::IncreaseLock)];
    let mut family_ids: Vec<Vec<FluentId>> = Vec::new();
    for (prefix, role) in families {
        let ids = p
            .fluents
            .iter()
            .map(|f| b.add_fluent(&format!("{prefix}-{}", f.name), false, role, Some(f.name.clone())))
            .collect();
        family_ids.push(ids);
    }
    let locks: Vec<Locks> = (0..p.fluents.len())
        .map(|i| Locks { read: family_ids[0][i], assign: family_ids[1][i], increase: family_ids[2][i] })
        .collect();

    let mut init_values = p.init.values().to_vec();
    init_values.push(Value::Bool(true));
    init_values.push(Value::Num(int(0)));
    init_values.push(Value::Num(int(0)));
    init_values.extend(running.iter().map(|_| Value::Bool(false)));
    init_values.extend(clock.iter().map(|_| Value::Num(int(0))));
    init_values.extend(std::iter::repeat_n(Value::Bool(true), 3 * locks.len()));
    let init = State::new(init_values);

    let goal = Formula::and([p.goal.clone(), Formula::Atom(ok), cmp(CmpOp::Eq, oc, &int(0))]);

    let guarded = |a: &InstantAction, extra: Vec<Formula>| -> Formula {
        let mut parts = vec![a.pre.clone(), Formula::Atom(ok), lock_precondition(a, &locks)];
        parts.extend(extra);
        Formula::and(parts)
    };
    let with_locks = |a: &InstantAction, extra: Vec<Effect>| -> Vec<Effect> {
        let mut effs = a.effects.clone();
        effs.extend(lock_effects(a, &locks));
        effs.extend(extra);
        effs
    };

    let mut actions = Vec::new();
    let mut action_origin = Vec::new();
    let mut instant_action = Vec::new();
    for (i, a) in p.instant_actions.iter().enumerate() {
        let name = b.op_name(&a.name);
        instant_action.push(actions.len());
        actions.push(InstantAction::new(name, guarded(a, vec![]), with_locks(a, vec![])));
        action_origin.push(Origin { role: Role::Instant, source: Some(i) });
    }
    let mut start_action = Vec::new();
    for (i, a) in p.durative_actions.iter().enumerate() {
        let name = b.op_name(&format!("start-{}", a.name));
        let pre = guarded(&a.start, vec![Formula::not(Formula::Atom(running[i]))]);
        let effs = with_locks(
            &a.start,
            vec![
                Effect::set(running[i], true),
                Effect::assign(clock[i], NumExpr::constant(int(0))),
                Effect::increase(oc, NumExpr::constant(int(1))),
            ],
        );
        start_action.push(actions.len());
        actions.push(InstantAction::new(name, pre, effs));
        action_origin.push(Origin { role: Role::Start, source: Some(i) });
    }
    let end_effects = |i: usize, a: &DurativeAction| {
        with_locks(&a.end, vec![Effect::set(running[i], false), Effect::increase(oc, NumExpr::constant(int(-1)))])
    };
    let mut end_action = vec![None; p.durative_actions.len()];
    for (i, a) in p.durative_actions.iter().enumerate() {
        if a.is_fixed() {
            continue;
        }
        let name = b.op_name(&format!("end-{}", a.name));
        let pre = guarded(
            &a.end,
            vec![
                Formula::Atom(running[i]),
                cmp(CmpOp::Ge, clock[i], &a.lower),
                cmp(CmpOp::Le, clock[i], &a.upper),
            ],
        );
        end_action[i] = Some(actions.len());
        actions.push(InstantAction::new(name, pre, end_effects(i, a)));
        action_origin.push(Origin { role: Role::EndVar, source: Some(i) });
    }

    // events, in firing priority: lock reset, expire, fixed ends, overall.
    // Ends precede overall checks so that an action ending at the same time
    // as another one whose end falsifies its invariant is not aborted.
    let mut lightning_effects = vec![Effect::assign(gc, NumExpr::constant(int(0)))];
    for l in &locks {
        lightning_effects.push(Effect::set(l.read, true));
        lightning_effects.push(Effect::set(l.assign, true));
        lightning_effects.push(Effect::set(l.increase, true));
    }
    let lightning = InstantAction::new(
        b.op_name("e-lightning"),
        Formula::and([Formula::Atom(ok), cmp(CmpOp::Gt, gc, &int(0))]),
        lightning_effects,
    );
    let mut events = vec![lightning];
    let mut event_origin = vec![Origin { role: Role::LockResetEvent, source: None }];

    let mut expire: Vec<(String, usize)> = Vec::new();
    let mut overall: Vec<(String, usize)> = Vec::new();
    let mut fixed_end: Vec<(String, usize)> = Vec::new();
    for (i, a) in p.durative_actions.iter().enumerate() {
        if options.expire_events && !a.is_fixed() {
            expire.push((b.op_name(&format!("e-expire-{}", a.name)), i));
        }
        overall.push((b.op_name(&format!("e-overall-{}", a.name)), i));
        if a.is_fixed() {
            fixed_end.push((b.op_name(&format!("e-end-{}", a.name)), i));
        }
    }
    expire.sort();
    overall.sort();
    fixed_end.sort();

    let abort = || vec![Effect::set(ok, false)];
    let mut expire_event = vec![None; p.durative_actions.len()];
    for (name, i) in expire {
        let a = &p.durative_actions[i];
        expire_event[i] = Some(events.len());
        events.push(InstantAction::new(
            name,
            Formula::and([Formula::Atom(ok), Formula::Atom(running[i]), cmp(CmpOp::Gt, clock[i], &a.upper)]),
            abort(),
        ));
        event_origin.push(Origin { role: Role::ExpireEvent, source: Some(i) });
    }
    let mut end_event = vec![None; p.durative_actions.len()];
    for (name, i) in fixed_end {
        let a = &p.durative_actions[i];
        let pre = guarded(
            &a.end,
            vec![Formula::Atom(running[i]), cmp(CmpOp::Eq, clock[i], &a.lower), cmp(CmpOp::Eq, gc, &int(0))],
        );
        end_event[i] = Some(events.len());
        events.push(InstantAction::new(name, pre, end_effects(i, a)));
        event_origin.push(Origin { role: Role::EndFixEvent, source: Some(i) });
    }

    let mut overall_event = vec![0; p.durative_actions.len()];
    for (name, i) in overall {
        let a = &p.durative_actions[i];
        overall_event[i] = events.len();
        events.push(InstantAction::new(
            name,
            Formula::and([Formula::Atom(ok), Formula::Atom(running[i]), Formula::not(a.overall.clone())]),
            abort(),
        ));
        event_origin.push(Origin { role: Role::OverallEvent, source: Some(i) });
    }
    let mut processes = Vec::new();
    let mut process_origin = Vec::new();
    for (i, a) in p.durative_actions.iter().enumerate() {
        processes.push(Process {
            name: b.op_name(&format!("p-{}", a.name)),
            pre: Formula::and([Formula::Atom(ok), Formula::Atom(running[i])]),
            rates: vec![(clock[i], NumExpr::constant(int(1)))],
        });
        process_origin.push(Origin { role: Role::ClockProcess, source: Some(i) });
    }
    processes.push(Process {
        name: b.op_name("p-lightning"),
        pre: Formula::Atom(ok),
        rates: vec![(gc, NumExpr::constant(int(1)))],
    });
    process_origin.push(Origin { role: Role::GcProcess, source: None });

    let fluent_roles = b.roles;
    let result = PlusProblem {
        domain_name: b.source.domain_name.clone(),
        problem_name: b.source.problem_name.clone(),
        fluents: b.fluents,
        init,
        goal,
        actions,
        events,
        processes,
    };
    debug_assert!(result.validate().is_ok(), "{:?}", result.validate());
    CompilationArtifacts {
        result,
        source: p.clone(),
        options: options.clone(),
        ok,
        oc,
        gc,
        running,
        clock,
        locks,
        action_origin,
        event_origin,
        process_origin,
        instant_action,
        start_action,
        end_action,
        end_event,
        overall_event,
        expire_event,
        lightning_event: 0,
        fluent_roles,
    }
}

/// Compiled-element names by role, for reports.
pub fn role_index(artifacts: &CompilationArtifacts) -> HashMap<String, Role> {
    artifacts.elements().into_iter().map(|e| (e.name, e.role)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rat, Value};

    fn locks_for(n: usize) -> Vec<Locks> {
        (0..n)
            .map(|i| Locks { read: FluentId(10 + 3 * i), assign: FluentId(11 + 3 * i), increase: FluentId(12 + 3 * i) })
            .collect()
    }

    fn atoms(f: &Formula) -> BTreeSet<FluentId> {
        f.fluents()
    }

    #[test]
    fn lock_precondition_read_and_assign() {
        let locks = locks_for(2);
        let (x, y) = (FluentId(0), FluentId(1));
        let a = InstantAction::new(
            "a",
            Formula::compare(CmpOp::Ge, NumExpr::fluent(x), NumExpr::constant(int(1))),
            vec![Effect::assign(y, NumExpr::constant(int(2)))],
        );
        let expected: BTreeSet<FluentId> =
            [locks[0].assign, locks[0].increase, locks[1].read, locks[1].increase, locks[1].assign].into();
        assert_eq!(atoms(&lock_precondition(&a, &locks)), expected);
        let effs = lock_effects(&a, &locks);
        assert_eq!(effs, vec![Effect::set(locks[1].assign, false), Effect::set(locks[0].read, false)]);
    }

    #[test]
    fn lock_precondition_dedups_shared_conjuncts() {
        let locks = locks_for(1);
        let x = FluentId(0);
        let a = InstantAction::new(
            "a",
            Formula::compare(CmpOp::Ge, NumExpr::fluent(x), NumExpr::constant(int(1))),
            vec![Effect::increase(x, NumExpr::constant(int(1)))],
        );
        let pre = lock_precondition(&a, &locks);
        assert_eq!(pre.conjuncts().len(), 3);
        assert_eq!(atoms(&pre), [locks[0].read, locks[0].assign, locks[0].increase].into());
    }

    #[test]
    fn no_fluents_no_locks() {
        let a = InstantAction::new("a", Formula::True, vec![]);
        assert_eq!(lock_precondition(&a, &[]), Formula::True);
        assert!(lock_effects(&a, &[]).is_empty());
    }

    fn match_problem(lower: i64, upper: i64) -> TemporalProblem {
        let lit = FluentId(0);
        let snap = |v: bool| InstantAction::new("match", Formula::True, vec![Effect::set(lit, v)]);
        TemporalProblem {
            domain_name: "m".into(),
            problem_name: "p".into(),
            fluents: vec![Fluent::boolean("lit"), Fluent::boolean("spare")],
            init: State::new(vec![Value::Bool(false), Value::Bool(false)]),
            instant_actions: vec![],
            durative_actions: vec![
                DurativeAction {
                    name: "match".into(),
                    lower: int(lower),
                    upper: int(upper),
                    start: snap(true),
                    end: snap(false),
                    overall: Formula::True,
                },
                DurativeAction {
                    name: "wait".into(),
                    lower: rat(1, 2),
                    upper: int(3),
                    start: InstantAction::new("wait", Formula::True, vec![]),
                    end: InstantAction::new("wait", Formula::True, vec![]),
                    overall: Formula::Atom(FluentId(1)),
                },
            ],
            goal: Formula::not(Formula::Atom(lit)),
        }
    }

    #[test]
    fn sizes_follow_the_construction() {
        let c = compile(&match_problem(5, 5));
        let r = &c.result;
        let bools = r.fluents.iter().filter(|f| f.kind == crate::model::FluentKind::Boolean).count();
        assert_eq!(bools, 2 + 1 + 2 + 3 * 2);
        assert_eq!(r.fluents.len() - bools, 2 + 2);
        assert_eq!(r.actions.len(), 2 + 1);
        assert_eq!(r.processes.len(), 3);
        assert_eq!(r.events.len(), 1 + 2 + 1 + 1);
    }

    #[test]
    fn fixed_action_ends_by_event() {
        let c = compile(&match_problem(5, 5));
        assert!(c.end_action[0].is_none());
        let e = &c.result.events[c.end_event[0].unwrap()];
        assert_eq!(e.name, "e-end-match");
        let conjuncts = e.pre.conjuncts();
        assert!(conjuncts.contains(&&cmp(CmpOp::Eq, c.clock[0], &int(5))));
        assert!(conjuncts.contains(&&cmp(CmpOp::Eq, c.gc, &int(0))));
    }

    #[test]
    fn variable_action_has_bounded_end_and_expire() {
        let c = compile(&match_problem(2, 4));
        let end = &c.result.actions[c.end_action[0].unwrap()];
        let conjuncts = end.pre.conjuncts();
        assert!(conjuncts.contains(&&cmp(CmpOp::Ge, c.clock[0], &int(2))));
        assert!(conjuncts.contains(&&cmp(CmpOp::Le, c.clock[0], &int(4))));
        let expire = &c.result.events[c.expire_event[0].unwrap()];
        assert_eq!(
            expire.pre,
            Formula::and([Formula::Atom(c.ok), Formula::Atom(c.running[0]), cmp(CmpOp::Gt, c.clock[0], &int(4))])
        );
        assert_eq!(expire.effects, vec![Effect::set(c.ok, false)]);
    }

    #[test]
    fn expire_events_can_be_disabled() {
        let c = compile_with(&match_problem(2, 4), &CompileOptions { expire_events: false });
        assert!(c.expire_event.iter().all(Option::is_none));
        assert_eq!(c.result.events.len(), 1 + 2);
    }

    #[test]
    fn introduced_names_avoid_collisions() {
        let mut p = match_problem(5, 5);
        p.fluents[1] = Fluent::boolean("ok");
        let c = compile(&p);
        assert_eq!(c.result.fluents[c.ok.0].name, "ok-2");
        assert_eq!(c.result.fluents[1].name, "ok");
    }

    #[test]
    fn name_map_lists_roles() {
        let c = compile(&match_problem(5, 5));
        let json = c.name_map_json().to_string();
        assert!(json.contains("\"end-fix-event\""), "{json}");
        assert!(json.contains("\"lock-reset-event\""));
    }
}
