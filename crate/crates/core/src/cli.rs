//! Command-line front end. Reports go to stdout as JSON (`"schema": 1`);
//! diagnostics and verdict lines go to stderr.
//!
//! Exit codes: 0 valid/success, 1 invalid plan, 2 input error, 3 resource
//! limit, divergence or exhausted search.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::bridge::{lift_plan, lower_plan, LiftError};
use crate::compiler::{compile_with, CompilationArtifacts, CompileOptions};
use crate::model::{format_rational, parse_rational, PlusProblem, Rational, TemporalPlan, TemporalProblem};
use crate::pddl::{
    load_plus, load_temporal, parse_plus_plan, parse_temporal_plan, print_plus, print_plus_plan, print_temporal_plan,
};
use crate::plus::{validate_plus, Applicability, PlusError, PlusOptions, PlusReport};
use crate::solver::{solve, SolveError, SolveOptions, SolveResult};
use crate::temporal::{validate_temporal_with, TemporalOptions, TemporalReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tempo2plus", version, about = "Compile temporal planning problems into PDDL+ and check plans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a temporal domain/problem into PDDL+.
    Compile {
        #[command(flatten)]
        input: Inputs,
        #[arg(long)]
        out_domain: Option<PathBuf>,
        #[arg(long)]
        out_problem: Option<PathBuf>,
        /// Write the compiled-element name map (JSON) here.
        #[arg(long)]
        name_map: Option<PathBuf>,
        /// Do not emit expire events for variable-duration actions.
        #[arg(long)]
        no_expire: bool,
    },
    /// Validate a temporal plan.
    ValidateTemporal {
        #[command(flatten)]
        input: Inputs,
        plan: PathBuf,
        /// Write the report with the full state trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Reject back-to-back instances of the same durative action.
        #[arg(long)]
        strict_self_overlap: bool,
    },
    /// Validate a PDDL+ plan under the discretized semantics.
    ValidatePlus {
        #[command(flatten)]
        input: Inputs,
        plan: PathBuf,
        #[arg(long, default_value = "1")]
        delta: String,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Inputs are a temporal domain/problem, compiled before validation.
        #[arg(long)]
        compile: bool,
        #[arg(long, requires = "compile")]
        no_expire: bool,
        /// Check every action's precondition at the head of its step too.
        #[arg(long)]
        at_step_head: bool,
    },
    /// Turn a plan of the compiled problem into a temporal plan.
    Lift {
        #[command(flatten)]
        input: Inputs,
        plan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_expire: bool,
    },
    /// Turn a temporal plan into a plan of the compiled problem.
    Lower {
        #[command(flatten)]
        input: Inputs,
        plan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_expire: bool,
    },
    /// Search for a plan of the compiled problem (or of a PDDL+ problem).
    Solve {
        #[command(flatten)]
        input: Inputs,
        #[command(flatten)]
        search: Search,
        /// Inputs are PDDL+ already; skip compilation and lifting.
        #[arg(long)]
        plus: bool,
        #[arg(long)]
        no_expire: bool,
        /// Write the PDDL+ plan here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the lifted temporal plan here.
        #[arg(long)]
        out_temporal: Option<PathBuf>,
    },
    /// Check both translation directions on one problem.
    Roundtrip {
        #[command(flatten)]
        input: Inputs,
        #[command(flatten)]
        search: Search,
        /// Also lower and check this temporal plan.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        no_expire: bool,
    },
}

#[derive(Debug, Args)]
struct Inputs {
    domain: PathBuf,
    problem: PathBuf,
}

#[derive(Debug, Args)]
struct Search {
    #[arg(long, default_value = "1")]
    delta: String,
    /// Largest makespan, in steps of δ.
    #[arg(long, default_value_t = 12)]
    horizon: usize,
    #[arg(long)]
    max_actions_per_step: Option<usize>,
    /// Node cap; defaults to TEMPO2PLUS_NODE_BUDGET or 1000000.
    #[arg(long)]
    node_budget: Option<usize>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Resource(_) => EXIT_RESOURCE,
        }
    }
}

impl From<PlusError> for CliError {
    fn from(e: PlusError) -> Self {
        match e {
            PlusError::Divergence { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Plus(e) => e.into(),
            SolveError::Unsound(_) => CliError::Resource(e.to_string()),
        }
    }
}

type Out<'a> = (&'a mut dyn Write, &'a mut dyn Write);

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, (stdout, stderr)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(command: Command, out: Out<'_>) -> Result<i32, CliError> {
    match command {
        Command::Compile { input, out_domain, out_problem, name_map, no_expire } => {
            cmd_compile(&input, out_domain, out_problem, name_map, no_expire, out)
        }
        Command::ValidateTemporal { input, plan, trace, strict_self_overlap } => {
            let p = temporal_input(&input)?;
            let plan = temporal_plan(&plan)?;
            let options = TemporalOptions { strict_self_overlap, ..TemporalOptions::default() };
            let report = validate_temporal_with(&p, &plan, &options).map_err(|e| CliError::Input(e.to_string()))?;
            if let Some(path) = trace {
                write_json(&path, &report.to_json(&p, true))?;
            }
            verdict_temporal(&report, out.1);
            emit(out.0, &report.to_json(&p, false))?;
            Ok(if report.valid { EXIT_OK } else { EXIT_INVALID })
        }
        Command::ValidatePlus { input, plan, delta, trace, compile, no_expire, at_step_head } => {
            let p = if compile {
                compile_with(&temporal_input(&input)?, &CompileOptions { expire_events: !no_expire }).result
            } else {
                plus_input(&input)?
            };
            let plan = parse_plus_plan(&read(&plan)?).map_err(|e| input_error(&plan, e))?;
            let mut options = PlusOptions::with_delta(delta_arg(&delta)?);
            if at_step_head {
                options.applicability = Applicability::AtStepHead;
            }
            let report = validate_plus(&p, &plan, &options)?;
            if let Some(path) = trace {
                write_json(&path, &report.to_json(&p, true))?;
            }
            verdict_plus(&report, out.1);
            emit(out.0, &report.to_json(&p, false))?;
            Ok(if report.valid { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Lift { input, plan, out: target, no_expire } => {
            let c = compiled(&input, no_expire)?;
            let plus = parse_plus_plan(&read(&plan)?).map_err(|e| input_error(&plan, e))?;
            let lifted = match lift_plan(&c, &plus) {
                Ok(t) => t,
                Err(e @ LiftError::UnknownAction(_)) => return Err(CliError::Input(e.to_string())),
                Err(e) => {
                    let _ = writeln!(out.1, "invalid: {e}");
                    emit(out.0, &json!({ "schema": 1, "kind": "lift", "ok": false, "error": e.to_string() }))?;
                    return Ok(EXIT_INVALID);
                }
            };
            let text = print_temporal_plan(&lifted);
            if let Some(path) = &target {
                write_text(path, &text)?;
            }
            emit(out.0, &json!({ "schema": 1, "kind": "lift", "ok": true, "entries": lifted.len(), "plan": text }))?;
            Ok(EXIT_OK)
        }
        Command::Lower { input, plan, out: target, no_expire } => {
            let c = compiled(&input, no_expire)?;
            let t = temporal_plan(&plan)?;
            let lowered = lower_plan(&c.source, &c, &t).map_err(|e| CliError::Input(e.to_string()))?;
            if let Some(w) = &lowered.warning {
                let _ = writeln!(out.1, "warning: {w}");
            }
            let text = print_plus_plan(&lowered.plan);
            if let Some(path) = &target {
                write_text(path, &text)?;
            }
            emit(
                out.0,
                &json!({
                    "schema": 1,
                    "kind": "lower",
                    "source_valid": lowered.source_valid,
                    "warning": lowered.warning,
                    "delta": lowered.delta.to_json(),
                    "makespan": format_rational(&lowered.plan.makespan),
                    "plan": text,
                }),
            )?;
            Ok(EXIT_OK)
        }
        Command::Solve { input, search, plus, no_expire, out: target, out_temporal } => {
            cmd_solve(&input, &search, plus, no_expire, target, out_temporal, out)
        }
        Command::Roundtrip { input, search, plan, no_expire } => cmd_roundtrip(&input, &search, plan, no_expire, out),
    }
}

fn cmd_compile(
    input: &Inputs,
    out_domain: Option<PathBuf>,
    out_problem: Option<PathBuf>,
    name_map: Option<PathBuf>,
    no_expire: bool,
    out: Out<'_>,
) -> Result<i32, CliError> {
    let c = compiled(input, no_expire)?;
    let (domain, problem) = print_plus(&c.result);
    let mut report = json!({
        "schema": 1,
        "kind": "compile",
        "sizes": sizes(&c.result),
    });
    match &out_domain {
        Some(path) => write_text(path, &domain)?,
        None => report["domain"] = json!(domain),
    }
    match &out_problem {
        Some(path) => write_text(path, &problem)?,
        None => report["problem"] = json!(problem),
    }
    match &name_map {
        Some(path) => write_json(path, &c.name_map_json())?,
        None => report["name_map"] = c.name_map_json(),
    }
    emit(out.0, &report)?;
    Ok(EXIT_OK)
}

fn cmd_solve(
    input: &Inputs,
    search: &Search,
    plus: bool,
    no_expire: bool,
    target: Option<PathBuf>,
    out_temporal: Option<PathBuf>,
    out: Out<'_>,
) -> Result<i32, CliError> {
    let c = if plus { None } else { Some(compiled(input, no_expire)?) };
    let p = match &c {
        Some(c) => c.result.clone(),
        None => plus_input(input)?,
    };
    let options = solve_options(search)?;
    let outcome = solve(&p, &options)?;
    let mut report = outcome.to_json();
    report["delta"] = json!(format_rational(&options.delta));
    let code = match &outcome.result {
        SolveResult::Found(plan) => {
            let text = print_plus_plan(plan);
            if let Some(path) = &target {
                write_text(path, &text)?;
            }
            report["plan"] = json!(text);
            if let Some(c) = &c {
                let lifted = lift_plan(c, plan).map_err(|e| CliError::Resource(format!("lifting failed: {e}")))?;
                let text = print_temporal_plan(&lifted);
                if let Some(path) = &out_temporal {
                    write_text(path, &text)?;
                }
                report["temporal_plan"] = json!(text);
            }
            let _ = writeln!(out.1, "found plan with {} actions, makespan {}", plan.len(), format_rational(&plan.makespan));
            EXIT_OK
        }
        SolveResult::Exhausted => {
            let _ = writeln!(out.1, "exhausted: no plan within horizon {}", options.horizon);
            EXIT_RESOURCE
        }
        SolveResult::BudgetExceeded => {
            let _ = writeln!(out.1, "node budget of {} exceeded", options.node_budget);
            EXIT_RESOURCE
        }
    };
    emit(out.0, &report)?;
    Ok(code)
}

fn cmd_roundtrip(
    input: &Inputs,
    search: &Search,
    plan: Option<PathBuf>,
    no_expire: bool,
    out: Out<'_>,
) -> Result<i32, CliError> {
    let c = compiled(input, no_expire)?;
    let options = solve_options(search)?;
    let mut stages: Vec<Json> = Vec::new();
    let mut code = EXIT_OK;
    let mut failed_stage: Option<&str> = None;
    let stage = |name: &str, ok: bool, detail: Json, stages: &mut Vec<Json>| {
        stages.push(json!({ "stage": name, "ok": ok, "detail": detail }));
        ok
    };

    // optional completeness direction on a supplied plan
    if let Some(path) = &plan {
        let t = temporal_plan(path)?;
        let report = validate_temporal_with(&c.source, &t, &TemporalOptions::default())
            .map_err(|e| CliError::Input(e.to_string()))?;
        if !stage("validate-temporal-input", report.valid, report.to_json(&c.source, false), &mut stages) {
            code = EXIT_INVALID;
            failed_stage = Some("validate-temporal-input");
        } else {
            let lowered = lower_plan(&c.source, &c, &t).map_err(|e| CliError::Input(e.to_string()))?;
            stage("lower", true, json!({ "delta": lowered.delta.to_json(), "plan": print_plus_plan(&lowered.plan) }), &mut stages);
            let r = validate_plus(&c.result, &lowered.plan, &PlusOptions::with_delta(lowered.delta.delta.clone()))?;
            if !stage("validate-plus-lowered", r.valid, r.to_json(&c.result, false), &mut stages) {
                code = EXIT_INVALID;
                failed_stage = Some("validate-plus-lowered");
            }
        }
    }

    // soundness direction through the solver
    if failed_stage.is_none() {
        let outcome = solve(&c.result, &options)?;
        let solved = outcome.to_json();
        match &outcome.result {
            SolveResult::Found(found) => {
                stage("solve", true, solved, &mut stages);
                let r = validate_plus(&c.result, found, &PlusOptions::with_delta(options.delta.clone()))?;
                if !stage("validate-plus", r.valid, r.to_json(&c.result, false), &mut stages) {
                    code = EXIT_INVALID;
                    failed_stage = Some("validate-plus");
                } else {
                    match lift_plan(&c, found) {
                        Err(e) => {
                            stage("lift", false, json!(e.to_string()), &mut stages);
                            code = EXIT_INVALID;
                            failed_stage = Some("lift");
                        }
                        Ok(lifted) => {
                            stage("lift", true, json!(print_temporal_plan(&lifted)), &mut stages);
                            let r = validate_temporal_with(&c.source, &lifted, &TemporalOptions::default())
                                .map_err(|e| CliError::Input(e.to_string()))?;
                            if !stage("validate-temporal", r.valid, r.to_json(&c.source, false), &mut stages) {
                                code = EXIT_INVALID;
                                failed_stage = Some("validate-temporal");
                            }
                        }
                    }
                }
            }
            SolveResult::Exhausted | SolveResult::BudgetExceeded => {
                stage("solve", false, solved, &mut stages);
                code = EXIT_RESOURCE;
                failed_stage = Some("solve");
            }
        }
    }

    match failed_stage {
        None => {
            let _ = writeln!(out.1, "round trip ok");
        }
        Some(s) => {
            let _ = writeln!(out.1, "round trip failed at {s}");
        }
    }
    emit(
        out.0,
        &json!({
            "schema": 1,
            "kind": "roundtrip",
            "ok": failed_stage.is_none(),
            "failed_stage": failed_stage,
            "stages": stages,
        }),
    )?;
    Ok(code)
}

fn sizes(p: &PlusProblem) -> Json {
    let booleans = p.fluents.iter().filter(|f| f.kind == crate::model::FluentKind::Boolean).count();
    json!({
        "boolean_fluents": booleans,
        "numeric_fluents": p.fluents.len() - booleans,
        "actions": p.actions.len(),
        "events": p.events.len(),
        "processes": p.processes.len(),
    })
}

fn solve_options(search: &Search) -> Result<SolveOptions, CliError> {
    let mut options = SolveOptions::new(delta_arg(&search.delta)?, search.horizon);
    options.max_actions_per_step = search.max_actions_per_step;
    if let Some(b) = search.node_budget {
        options.node_budget = b;
    }
    Ok(options)
}

fn delta_arg(text: &str) -> Result<Rational, CliError> {
    let d = parse_rational(text).ok_or_else(|| CliError::Input(format!("`{text}` is not a number")))?;
    if d <= Rational::from_integer(0.into()) {
        return Err(CliError::Input(format!("time quantum must be positive, got {text}")));
    }
    Ok(d)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn input_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn temporal_input(input: &Inputs) -> Result<TemporalProblem, CliError> {
    let (d, p) = (read(&input.domain)?, read(&input.problem)?);
    load_temporal(&d, &p).map_err(|e| CliError::Input(format!("{} / {}: {e}", input.domain.display(), input.problem.display())))
}

fn plus_input(input: &Inputs) -> Result<PlusProblem, CliError> {
    let (d, p) = (read(&input.domain)?, read(&input.problem)?);
    load_plus(&d, &p).map_err(|e| CliError::Input(format!("{} / {}: {e}", input.domain.display(), input.problem.display())))
}

fn compiled(input: &Inputs, no_expire: bool) -> Result<CompilationArtifacts, CliError> {
    Ok(compile_with(&temporal_input(input)?, &CompileOptions { expire_events: !no_expire }))
}

fn temporal_plan(path: &Path) -> Result<TemporalPlan, CliError> {
    parse_temporal_plan(&read(path)?).map_err(|e| input_error(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &Json) -> Result<(), CliError> {
    write_text(path, &format!("{}\n", serde_json::to_string_pretty(value).expect("JSON values serialize")))
}

fn emit(stdout: &mut dyn Write, value: &Json) -> Result<(), CliError> {
    writeln!(stdout, "{}", serde_json::to_string_pretty(value).expect("JSON values serialize"))
        .map_err(|e| CliError::Resource(format!("cannot write report: {e}")))
}

fn verdict_temporal(report: &TemporalReport, stderr: &mut dyn Write) {
    let _ = match &report.failure {
        None => writeln!(stderr, "valid"),
        Some(f) => writeln!(stderr, "invalid ({}): {}", f.kind, f.detail),
    };
}

fn verdict_plus(report: &PlusReport, stderr: &mut dyn Write) {
    let _ = match &report.failure {
        None => writeln!(stderr, "valid"),
        Some(f) => writeln!(stderr, "invalid ({}): {}", f.phase, f.detail),
    };
}
