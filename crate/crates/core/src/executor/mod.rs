//! The attack execution engine: runs a compiled script against a profile and
//! a set of sessions, enforcing the pre/attack/post skip rules.
//!
//! * a precondition that is not OK skips its attack ("not executed")
//! * a skipped attack skips its postcondition ("not checked")
//! * a failed attack leaves its assignment `Absent`, but the postcondition
//!   is still evaluated
//! * nothing aborts the run; every command yields a report entry

mod adapter;
mod eval;
mod report;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

pub use adapter::{AdapterOutput, AdapterRegistry, Invocation, Session};
pub use eval::evaluate_assert;
pub use report::{ExecutionReport, ReportEntry, Status};

use crate::clock::Clock;
use crate::compiler::template::{parse_template, Modifier, Piece, Placeholder};
use crate::compiler::{CompiledCommand, CompiledScript, InvalidScript, Phase, BUILTIN_ENV};
use crate::kb::SutProfile;
use crate::value::Value;

pub const DEFAULT_TIMEOUT_MS: u64 = 30_000;
pub const DEFAULT_LOOP_CAP: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    pub loop_cap: u64,
    pub default_timeout_ms: u64,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            loop_cap: DEFAULT_LOOP_CAP,
            default_timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }
}

/// Mutable state of one run.
#[derive(Default)]
pub struct RunState {
    pub variables: BTreeMap<String, Value>,
    pub skipped_labels: BTreeSet<String>,
    sessions: BTreeMap<String, Box<dyn Session>>,
}

impl RunState {
    pub fn session_names(&self) -> Vec<&str> {
        self.sessions.keys().map(String::as_str).collect()
    }

    /// Run variables first, then the profile.
    pub fn lookup(&self, profile: &SutProfile, path: &[String]) -> Option<Value> {
        let root = match self.variables.get(&path[0]) {
            Some(v) => v.clone(),
            None => profile.resolve(&path[0])?,
        };
        Some(root.read_path(&path[1..]))
    }

    fn assign(&mut self, target: &str, value: Value) {
        let path: Vec<&str> = target.split('.').collect();
        let root = self.variables.remove(path[0]).unwrap_or_default();
        self.variables
            .insert(path[0].to_string(), root.write_path(&path[1..], value));
    }
}

impl std::fmt::Debug for RunState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RunState")
            .field("variables", &self.variables)
            .field("skipped_labels", &self.skipped_labels)
            .field("sessions", &self.session_names())
            .finish()
    }
}

/// Execute `script` to completion. Only a schema violation is an error.
pub fn execute(
    script: &CompiledScript,
    profile: &SutProfile,
    registry: &mut dyn AdapterRegistry,
    opts: ExecOptions,
) -> Result<ExecutionReport, InvalidScript> {
    let mut exec = Executor::new(profile, registry, opts);
    exec.run(script)
}

pub struct Executor<'a> {
    profile: &'a SutProfile,
    registry: &'a mut dyn AdapterRegistry,
    clock: Arc<dyn Clock>,
    opts: ExecOptions,
    state: RunState,
    /// Per label: whether the last precondition was not OK.
    pre_blocked: HashMap<String, bool>,
    /// Per label: whether the last attack was skipped.
    attack_skipped: HashMap<String, bool>,
    entries: Vec<ReportEntry>,
}

/// Result of running one command, before it becomes a report entry.
struct Outcome {
    status: Status,
    detail: String,
    output: String,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome {
            status: Status::Ok,
            detail: String::new(),
            output,
        }
    }

    fn failed(detail: impl Into<String>, output: String) -> Self {
        Outcome {
            status: Status::Failed,
            detail: detail.into(),
            output,
        }
    }
}

impl<'a> Executor<'a> {
    pub fn new(
        profile: &'a SutProfile,
        registry: &'a mut dyn AdapterRegistry,
        opts: ExecOptions,
    ) -> Self {
        let clock = registry.clock();
        let mut state = RunState::default();
        for (name, session) in registry.initial_sessions() {
            state.sessions.insert(name, session);
        }
        Executor {
            profile,
            registry,
            clock,
            opts,
            state,
            pre_blocked: HashMap::new(),
            attack_skipped: HashMap::new(),
            entries: Vec::new(),
        }
    }

    pub fn state(&self) -> &RunState {
        &self.state
    }

    pub fn run(&mut self, script: &CompiledScript) -> Result<ExecutionReport, InvalidScript> {
        script.validate()?;
        self.run_block(&script.execute);
        Ok(ExecutionReport {
            entries: std::mem::take(&mut self.entries),
        })
    }

    fn run_block(&mut self, commands: &[CompiledCommand]) {
        for cmd in commands {
            self.run_command(cmd);
        }
    }

    fn run_command(&mut self, cmd: &CompiledCommand) {
        let phase = cmd.phase.unwrap_or(Phase::Attack);
        let label = cmd.label.as_deref();
        let skipped = match (phase, label) {
            (Phase::Attack, Some(l)) => self.pre_blocked.remove(l).unwrap_or(false),
            (Phase::Post, Some(l)) => self.attack_skipped.get(l).copied().unwrap_or(false),
            _ => false,
        };
        if skipped {
            if phase == Phase::Attack {
                if let Some(target) = &cmd.assign {
                    self.state.assign(target, Value::Absent);
                }
                self.state.skipped_labels.insert(label.unwrap_or_default().to_string());
                self.attack_skipped.insert(label.unwrap_or_default().to_string(), true);
            }
            let what = if phase == Phase::Attack { "not executed" } else { "not checked" };
            self.push(cmd, Outcome {
                status: Status::Skipped,
                detail: what.into(),
                output: String::new(),
            });
            return;
        }
        if phase == Phase::Attack {
            if let Some(l) = label {
                self.attack_skipped.insert(l.to_string(), false);
            }
        }

        if cmd.is_control() {
            self.run_control(cmd);
            return;
        }

        let outcome = if cmd.environment == BUILTIN_ENV {
            self.run_builtin(cmd)
        } else {
            self.dispatch(cmd)
        };
        if let (Phase::Pre, Some(l)) = (phase, label) {
            self.pre_blocked.insert(l.to_string(), outcome.status != Status::Ok);
        }
        if outcome.status != Status::Ok {
            if let Some(target) = &cmd.assign {
                self.state.assign(target, Value::Absent);
            }
        }
        self.push(cmd, outcome);
    }

    fn push(&mut self, cmd: &CompiledCommand, outcome: Outcome) {
        let message = message_for(cmd, &outcome);
        self.entries.push(ReportEntry {
            seq: self.entries.len() as u64 + 1,
            label: cmd.label.clone(),
            phase: cmd.phase,
            status: outcome.status,
            message,
            output: outcome.output,
            time_ms: self.clock.now_ms(),
        });
    }

    fn assertion(&mut self, parameters: &[String]) -> Result<bool, String> {
        evaluate_assert(parameters, &self.state, self.profile, &mut *self.registry)
    }

    fn run_builtin(&mut self, cmd: &CompiledCommand) -> Outcome {
        match cmd.tool.as_str() {
            "assert" => match self.assertion(&cmd.parameters) {
                Ok(true) => Outcome::ok("true".into()),
                Ok(false) => Outcome::failed("assertion false", "false".into()),
                Err(e) => Outcome::failed(e, String::new()),
            },
            other => Outcome::failed(format!("unknown-builtin:{other}"), String::new()),
        }
    }

    /// `if` reports before its branch runs, `while` after its last iteration.
    fn run_control(&mut self, cmd: &CompiledCommand) {
        let body = cmd.body.as_deref().unwrap_or_default();
        if cmd.tool == "if" {
            match self.assertion(&cmd.parameters) {
                Ok(taken) => {
                    let branch = if taken { "then branch" } else { "else branch" };
                    self.push(cmd, Outcome::ok(branch.into()));
                    if taken {
                        self.run_block(body);
                    } else if let Some(e) = &cmd.else_body {
                        self.run_block(e);
                    }
                }
                Err(e) => self.push(cmd, Outcome::failed(e, String::new())),
            }
            return;
        }
        let mut iterations = 0u64;
        let outcome = loop {
            match self.assertion(&cmd.parameters) {
                Ok(false) => break Outcome::ok(format!("{iterations} iterations")),
                Ok(true) if iterations >= self.opts.loop_cap => {
                    break Outcome::failed("loop-cap", format!("{iterations} iterations"))
                }
                Ok(true) => {
                    iterations += 1;
                    self.run_block(body);
                }
                Err(e) => break Outcome::failed(e, format!("{iterations} iterations")),
            }
        };
        self.push(cmd, outcome);
    }

    fn dispatch(&mut self, cmd: &CompiledCommand) -> Outcome {
        let resolved = (|| {
            let env = self.resolve_single(&cmd.environment)?;
            let tool = self.resolve_single(&cmd.tool)?;
            let mut params = Vec::with_capacity(cmd.parameters.len());
            for p in &cmd.parameters {
                params.extend(self.resolve_item(p)?);
            }
            Ok::<_, String>((env, tool, params))
        })();
        let (env, tool, params) = match resolved {
            Ok(r) => r,
            Err(e) => return Outcome::failed(e, String::new()),
        };
        if env == BUILTIN_ENV {
            return Outcome::failed(format!("unknown-builtin:{tool}"), String::new());
        }
        let Some(session) = self.state.sessions.get_mut(&env) else {
            return Outcome::failed(format!("no-session:{env}"), String::new());
        };
        let timeout = cmd.timeout_ms.unwrap_or(self.opts.default_timeout_ms);
        let deadline_ms = self.clock.now_ms().saturating_add(timeout);
        let invocation = Invocation {
            session: &env,
            tool: &tool,
            parameters: &params,
            deadline_ms,
        };
        tracing::debug!(session = %env, tool = %tool, ?params, "dispatch");
        let out = match session.dispatch(&invocation) {
            Ok(out) => out,
            Err(fault) => return Outcome::failed(fault, String::new()),
        };
        if self.clock.now_ms() > deadline_ms {
            return Outcome::failed(format!("timeout after {timeout} ms"), out.output);
        }
        if out.status != 0 {
            let first_line = out.output.lines().next().unwrap_or("").to_string();
            return Outcome::failed(format!("exit status {}: {first_line}", out.status), out.output);
        }
        if out.close {
            self.state.sessions.remove(&env);
        }
        if let Some(name) = &out.spawn {
            if self.state.sessions.contains_key(name) {
                return Outcome::failed(format!("duplicate-session:{name}"), out.output);
            }
            match self.registry.open_session(name) {
                Ok(s) => {
                    self.state.sessions.insert(name.clone(), s);
                }
                Err(e) => return Outcome::failed(e, out.output),
            }
        }
        for (name, value) in &out.observations {
            self.state.variables.insert(name.clone(), value.clone());
        }
        if let Some(target) = &cmd.assign {
            let value = out.value.clone().unwrap_or_else(|| Value::from_output(&out.output));
            self.state.assign(target, value);
        }
        Outcome::ok(out.output)
    }

    fn resolve_hole(&self, h: &Placeholder) -> Result<Value, String> {
        match self.state.lookup(self.profile, &h.path) {
            None => Err(format!("unresolved-variable:{}", h.root())),
            Some(Value::Absent) => Err(format!("absent-variable:{}", h.dotted())),
            Some(v) => Ok(v),
        }
    }

    fn resolve_single(&self, text: &str) -> Result<String, String> {
        let pieces = parse_template(text).map_err(|e| format!("bad-placeholder: {e}"))?;
        let mut out = String::new();
        for p in pieces {
            match p {
                Piece::Literal(s) => out.push_str(&s),
                Piece::Hole(h) => {
                    let v = self.resolve_hole(&h)?.to_text();
                    match h.modifier {
                        None => out.push_str(&v),
                        Some(Modifier::Head) => out.push_str(&Modifier::Head.apply(&v)[0]),
                        Some(Modifier::Tail) => {
                            return Err(format!("bad-placeholder: {h} must be a whole parameter"))
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn resolve_item(&self, text: &str) -> Result<Vec<String>, String> {
        if let Ok(pieces) = parse_template(text) {
            if let [Piece::Hole(h)] = pieces.as_slice() {
                if h.modifier == Some(Modifier::Tail) {
                    let v = self.resolve_hole(h)?.to_text();
                    return Ok(Modifier::Tail.apply(&v));
                }
            }
        }
        self.resolve_single(text).map(|s| vec![s])
    }
}

fn message_for(cmd: &CompiledCommand, o: &Outcome) -> String {
    let label = cmd.label.as_deref();
    let subject = match (cmd.phase.unwrap_or(Phase::Attack), label) {
        (Phase::Pre, Some(l)) => format!("Precond {l}"),
        (Phase::Post, Some(l)) => format!("Postcond {l}"),
        (_, Some(l)) if cmd.is_control() => format!("{} {l}", capitalize(&cmd.tool)),
        (_, Some(l)) => format!("Attack {l}"),
        (_, None) => format!("Command {}", cmd.tool),
    };
    let is_condition = cmd.environment == BUILTIN_ENV && cmd.tool == "assert";
    match o.status {
        Status::Ok if cmd.is_control() => format!("{subject}: {}", o.output),
        Status::Ok if is_condition => format!("{subject} fulfilled"),
        Status::Ok => format!("{subject} executed"),
        Status::Failed => format!("{subject} failed: {}", o.detail),
        Status::Skipped => format!("{subject} {}", o.detail),
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
