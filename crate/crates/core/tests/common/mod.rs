//! Fixture loading and seeded random problem generators shared by the
//! integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tempo2plus::model::{
    int, CmpOp, DurativeAction, Effect, Fluent, FluentId, Formula, InstantAction, NumExpr, PlanEntry, Rational, State,
    TemporalPlan, TemporalProblem, Value,
};
use tempo2plus::pddl::{load_temporal, parse_temporal_plan};
use tempo2plus::temporal::validate_temporal;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub struct Fixture {
    pub name: String,
    pub dir: PathBuf,
    pub problem: TemporalProblem,
}

impl Fixture {
    pub fn domain_path(&self) -> PathBuf {
        self.dir.join("domain.pddl")
    }

    pub fn problem_path(&self) -> PathBuf {
        self.dir.join("problem.pddl")
    }

    fn plans(&self, invalid: bool) -> Vec<(String, TemporalPlan)> {
        let mut out: Vec<(String, TemporalPlan)> = std::fs::read_dir(&self.dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "plan"))
            .filter(|p| p.file_stem().unwrap().to_string_lossy().starts_with("invalid-") == invalid)
            .map(|p| {
                let text = std::fs::read_to_string(&p).unwrap();
                let plan = parse_temporal_plan(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
                (format!("{}/{}", self.name, p.file_name().unwrap().to_string_lossy()), plan)
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Plans expected to be valid.
    pub fn valid_plans(&self) -> Vec<(String, TemporalPlan)> {
        self.plans(false)
    }

    /// Plans expected to be rejected (`invalid-*.plan`).
    pub fn invalid_plans(&self) -> Vec<(String, TemporalPlan)> {
        self.plans(true)
    }

    /// Time quantum and horizon under which the solver is expected to succeed.
    pub fn solve_settings(&self) -> (Rational, usize) {
        match self.name.as_str() {
            "brew" => (Rational::new(1.into(), 2.into()), 12),
            _ => (int(1), 12),
        }
    }

    /// Whether some plan exists for the fixture at all.
    pub fn solvable(&self) -> bool {
        self.name != "unsolvable"
    }
}

pub fn fixture(name: &str) -> Fixture {
    let dir = fixtures_dir().join(name);
    let read = |f: &str| std::fs::read_to_string(dir.join(f)).unwrap_or_else(|e| panic!("{name}/{f}: {e}"));
    let problem = load_temporal(&read("domain.pddl"), &read("problem.pddl")).unwrap_or_else(|e| panic!("{name}: {e}"));
    Fixture { name: name.to_string(), dir, problem }
}

pub fn fixtures() -> Vec<Fixture> {
    let mut names: Vec<String> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names.iter().map(|n| fixture(n)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size limits for random ground problems.
#[derive(Debug, Clone, Copy)]
pub struct Sizes {
    pub booleans: usize,
    pub numerics: usize,
    pub instants: usize,
    pub duratives: usize,
    pub max_bound: i64,
}

pub const TINY: Sizes = Sizes { booleans: 4, numerics: 2, instants: 2, duratives: 3, max_bound: 3 };
pub const SIZE_CHECK: Sizes = Sizes { booleans: 6, numerics: 4, instants: 3, duratives: 5, max_bound: 4 };

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    booleans: Vec<FluentId>,
    numerics: Vec<FluentId>,
}

impl Gen<'_> {
    fn literal(&mut self) -> Formula {
        let f = *self.booleans.choose(self.rng).unwrap();
        if self.rng.gen_bool(0.6) {
            Formula::Atom(f)
        } else {
            Formula::not(Formula::Atom(f))
        }
    }

    fn condition(&mut self) -> Formula {
        if !self.numerics.is_empty() && self.rng.gen_bool(0.25) {
            let x = *self.numerics.choose(self.rng).unwrap();
            let c = self.rng.gen_range(0..4);
            Formula::compare(CmpOp::Ge, NumExpr::fluent(x), NumExpr::constant(int(c)))
        } else {
            self.literal()
        }
    }

    fn precondition(&mut self, max: usize) -> Formula {
        let n = self.rng.gen_range(0..=max);
        Formula::and((0..n).map(|_| self.condition()).collect::<Vec<_>>())
    }

    fn effects(&mut self, max: usize) -> Vec<Effect> {
        let n = self.rng.gen_range(0..=max);
        let mut targets: Vec<FluentId> = self.booleans.iter().chain(&self.numerics).copied().collect();
        targets.shuffle(self.rng);
        targets
            .into_iter()
            .take(n)
            .map(|t| {
                if self.booleans.contains(&t) {
                    Effect::set(t, self.rng.gen_bool(0.6))
                } else {
                    match self.rng.gen_range(0..4) {
                        0 => Effect::assign(t, NumExpr::constant(int(self.rng.gen_range(0..4)))),
                        1 => {
                            let y = *self.numerics.choose(self.rng).unwrap();
                            Effect::increase(t, NumExpr::fluent(y))
                        }
                        _ => Effect::increase(t, NumExpr::constant(int(self.rng.gen_range(1..3)))),
                    }
                }
            })
            .collect()
    }
}

/// Random ground temporal problem with goal ⊤; at least one boolean fluent.
pub fn random_problem(rng: &mut ChaCha8Rng, sizes: Sizes) -> TemporalProblem {
    let nb = rng.gen_range(1..=sizes.booleans);
    let nx = rng.gen_range(0..=sizes.numerics);
    let ni = rng.gen_range(0..=sizes.instants);
    let nd = rng.gen_range(1..=sizes.duratives);
    let mut fluents: Vec<Fluent> = (0..nb).map(|i| Fluent::boolean(format!("b{i}"))).collect();
    fluents.extend((0..nx).map(|i| Fluent::numeric(format!("x{i}"))));
    let mut init: Vec<Value> = (0..nb).map(|_| Value::Bool(rng.gen_bool(0.4))).collect();
    init.extend((0..nx).map(|_| Value::Num(int(rng.gen_range(0..3)))));
    let mut g = Gen {
        rng,
        booleans: (0..nb).map(FluentId).collect(),
        numerics: (nb..nb + nx).map(FluentId).collect(),
    };
    let instant_actions = (0..ni)
        .map(|i| {
            let pre = g.precondition(2);
            InstantAction::new(format!("i{i}"), pre, g.effects(2))
        })
        .collect();
    let durative_actions = (0..nd)
        .map(|i| {
            let name = format!("d{i}");
            let lower = g.rng.gen_range(1..=sizes.max_bound);
            let upper = if g.rng.gen_bool(0.5) { lower } else { g.rng.gen_range(lower..=sizes.max_bound) };
            let start_pre = g.precondition(2);
            let start = InstantAction::new(name.clone(), start_pre, g.effects(2));
            let end_pre = g.precondition(1);
            let end = InstantAction::new(name.clone(), end_pre, g.effects(2));
            let overall = if g.rng.gen_bool(0.5) { Formula::True } else { g.literal() };
            DurativeAction { name, lower: int(lower), upper: int(upper), start, end, overall }
        })
        .collect();
    let p = TemporalProblem {
        domain_name: "random".into(),
        problem_name: "random-1".into(),
        fluents,
        init: State::new(init),
        instant_actions,
        durative_actions,
        goal: Formula::True,
    };
    p.validate().expect("generator produces well-formed problems");
    p
}

/// Random tiny problem together with a valid witness plan; the goal is read
/// off the state the witness reaches. Actions are executed one after the
/// other with integral times, so δ = 1 suffices.
pub fn random_instance(seed: u64) -> (TemporalProblem, TemporalPlan) {
    let mut r = rng(seed);
    loop {
        let mut p = random_problem(&mut r, TINY);
        let mut state = p.init.clone();
        let mut plan = TemporalPlan::new();
        let mut t = 0i64;
        for _ in 0..r.gen_range(1..=3) {
            let choice = r.gen_range(0..p.instant_actions.len() + p.durative_actions.len());
            if choice < p.instant_actions.len() {
                let a = &p.instant_actions[choice];
                if a.is_applicable(&state) == Ok(true) {
                    state = a.apply(&state).unwrap();
                    plan.insert(PlanEntry::new(int(t), a.name.clone(), int(0)));
                    t += 1;
                }
                continue;
            }
            let a = &p.durative_actions[choice - p.instant_actions.len()];
            let lower: i64 = a.lower.to_integer().try_into().unwrap();
            let upper: i64 = a.upper.to_integer().try_into().unwrap();
            let d = r.gen_range(lower..=upper);
            if a.start.is_applicable(&state) != Ok(true) {
                continue;
            }
            let mid = a.start.apply(&state).unwrap();
            if a.overall.holds(&mid) != Ok(true) || a.end.is_applicable(&mid) != Ok(true) {
                continue;
            }
            state = a.end.apply(&mid).unwrap();
            plan.insert(PlanEntry::new(int(t), a.name.clone(), int(d)));
            t += d + 1;
        }
        if plan.is_empty() {
            continue;
        }
        let changed: Vec<usize> = (0..p.fluents.len())
            .filter(|&i| matches!(state.get(FluentId(i)), Value::Bool(_)) && state.get(FluentId(i)) != p.init.get(FluentId(i)))
            .collect();
        if changed.is_empty() {
            continue;
        }
        let goal: Vec<Formula> = changed
            .iter()
            .take(2)
            .map(|&i| {
                let f = Formula::Atom(FluentId(i));
                if state.bool_of(FluentId(i)) == Some(true) {
                    f
                } else {
                    Formula::not(f)
                }
            })
            .collect();
        p.goal = Formula::and(goal);
        if validate_temporal(&p, &plan).map(|r| r.valid) == Ok(true) {
            return (p, plan);
        }
    }
}

/// Two instantaneous actions over a shared pool of fluents whose
/// preconditions are tautologies reading random fluents, so that only their
/// interference decides whether they can share a time point.
pub fn random_instant_pair(seed: u64) -> TemporalProblem {
    let mut r = rng(seed);
    let fluents = vec![
        Fluent::boolean("p"),
        Fluent::boolean("q"),
        Fluent::boolean("r"),
        Fluent::numeric("x"),
        Fluent::numeric("y"),
    ];
    let init = State::new(vec![
        Value::Bool(r.gen_bool(0.5)),
        Value::Bool(r.gen_bool(0.5)),
        Value::Bool(r.gen_bool(0.5)),
        Value::Num(int(r.gen_range(0..3))),
        Value::Num(int(r.gen_range(0..3))),
    ]);
    let mut g = Gen { rng: &mut r, booleans: vec![FluentId(0), FluentId(1), FluentId(2)], numerics: vec![FluentId(3), FluentId(4)] };
    let action = |name: &str, g: &mut Gen<'_>| {
        let reads = g.rng.gen_range(0..=2);
        let pre = Formula::and(
            (0..reads)
                .map(|_| {
                    let f = FluentId(g.rng.gen_range(0..5));
                    if f.0 < 3 {
                        Formula::or([Formula::Atom(f), Formula::not(Formula::Atom(f))])
                    } else {
                        Formula::compare(CmpOp::Ge, NumExpr::fluent(f), NumExpr::constant(int(-1000)))
                    }
                })
                .collect::<Vec<_>>(),
        );
        let mut effects = g.effects(2);
        // increments stay positive so the tautologies keep holding
        for e in &mut effects {
            if let tempo2plus::model::EffectKind::Increase(_) = e.kind {
                *e = Effect::increase(e.target, NumExpr::constant(int(1)));
            }
        }
        InstantAction::new(name, pre, effects)
    };
    let a = action("a", &mut g);
    let b = action("b", &mut g);
    TemporalProblem {
        domain_name: "pair".into(),
        problem_name: "pair-1".into(),
        fluents,
        init,
        instant_actions: vec![a, b],
        durative_actions: vec![],
        goal: Formula::True,
    }
}
