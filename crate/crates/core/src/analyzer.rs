//! Static checks: def-use of variables, system-variable existence against an
//! optional profile, and label closure between conditions and actions.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::ast::{ArgValue, AttackDescription, AttackStep, Condition, LValue, StepBody};
use crate::diagnostic::{sort_diagnostics, Diagnostic};
use crate::kb::SutProfile;
use crate::sim;

/// Classification of every identifier the description touches.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    /// Assigned identifiers, mapped to the index (in depth-first step order)
    /// of their first assigning step.
    pub auxiliary: BTreeMap<String, usize>,
    /// Identifiers read but never assigned; resolved from the profile or
    /// from adapter observations at run time.
    pub system_candidates: BTreeSet<String>,
}

impl SymbolTable {
    pub fn build(ast: &AttackDescription) -> SymbolTable {
        let mut table = SymbolTable::default();
        for (idx, step) in ast.all_steps().into_iter().enumerate() {
            if let Some(lv) = &step.assign {
                table.auxiliary.entry(lv.root().to_string()).or_insert(idx);
            }
        }
        let mut reads = Vec::new();
        for c in ast.preconditions.iter().chain(&ast.postconditions) {
            reads.extend(c.expr.paths());
        }
        for step in ast.all_steps() {
            match &step.body {
                StepBody::Call(call) => reads.extend(call.args.iter().filter_map(|a| match &a.value {
                    ArgValue::Var(lv) => Some(lv),
                    _ => None,
                })),
                StepBody::If { cond, .. } | StepBody::While { cond, .. } => {
                    reads.extend(cond.paths())
                }
            }
        }
        for lv in reads {
            if !table.auxiliary.contains_key(lv.root()) {
                table.system_candidates.insert(lv.root().to_string());
            }
        }
        table
    }
}

/// Inputs to [`check_with`] beyond the tree itself.
#[derive(Debug, Clone, Default)]
pub struct CheckOptions<'a> {
    pub profile: Option<&'a SutProfile>,
    /// Names published by tool adapters at run time (e.g. `WIFI`).
    pub observations: BTreeSet<String>,
}

impl<'a> CheckOptions<'a> {
    pub fn with_builtin_observations(profile: Option<&'a SutProfile>) -> Self {
        CheckOptions {
            profile,
            observations: sim::builtin_observations(),
        }
    }
}

/// Check with an optional profile and the simulator's observation manifest.
pub fn check(ast: &AttackDescription, profile: Option<&SutProfile>) -> Vec<Diagnostic> {
    check_with(ast, &CheckOptions::with_builtin_observations(profile))
}

pub fn check_with(ast: &AttackDescription, opts: &CheckOptions<'_>) -> Vec<Diagnostic> {
    let mut diags = label_diagnostics(ast);
    let table = SymbolTable::build(ast);
    let call_args: HashSet<&str> = ast
        .all_steps()
        .into_iter()
        .filter_map(|s| match &s.body {
            StepBody::Call(c) => Some(c),
            _ => None,
        })
        .flat_map(|c| c.args.iter())
        .filter_map(|a| match &a.value {
            ArgValue::Var(lv) => Some(lv.root()),
            _ => None,
        })
        .collect();

    let mut walker = DefUse {
        opts,
        table: &table,
        call_args: &call_args,
        pre: index_conditions(&ast.preconditions),
        post: index_conditions(&ast.postconditions),
        defined: HashSet::new(),
        maybe: HashSet::new(),
        diags: Vec::new(),
    };
    walker.steps(&ast.actions, false);
    // conditions bound to no action never run, but their reads are still
    // checked so typos in them surface
    let bound: HashSet<&str> = ast.all_steps().iter().map(|s| s.label.as_str()).collect();
    for c in ast.preconditions.iter().chain(&ast.postconditions) {
        if !bound.contains(c.label.as_str()) {
            walker.condition(c);
        }
    }
    diags.extend(walker.diags);
    sort_diagnostics(&mut diags);
    diags
}

fn index_conditions(conds: &[Condition]) -> HashMap<&str, &Condition> {
    let mut map = HashMap::new();
    for c in conds {
        map.entry(c.label.as_str()).or_insert(c);
    }
    map
}

struct DefUse<'a> {
    opts: &'a CheckOptions<'a>,
    table: &'a SymbolTable,
    call_args: &'a HashSet<&'a str>,
    pre: HashMap<&'a str, &'a Condition>,
    post: HashMap<&'a str, &'a Condition>,
    defined: HashSet<String>,
    maybe: HashSet<String>,
    diags: Vec<Diagnostic>,
}

impl<'a> DefUse<'a> {
    fn steps(&mut self, steps: &'a [AttackStep], in_branch: bool) {
        for s in steps {
            self.step(s, in_branch);
        }
    }

    fn step(&mut self, step: &'a AttackStep, in_branch: bool) {
        if let Some(c) = self.pre.get(step.label.as_str()).copied() {
            self.condition(c);
        }
        match &step.body {
            StepBody::Call(call) => {
                for arg in &call.args {
                    if let ArgValue::Var(lv) = &arg.value {
                        self.read(lv);
                    }
                }
                if let Some(target) = &step.assign {
                    let name = target.root().to_string();
                    if in_branch {
                        if !self.defined.contains(&name) {
                            self.maybe.insert(name);
                        }
                    } else {
                        self.defined.insert(name);
                    }
                }
            }
            StepBody::If {
                cond,
                then_branch,
                else_branch,
            } => {
                for lv in cond.paths() {
                    self.read(lv);
                }
                self.steps(then_branch, true);
                if let Some(e) = else_branch {
                    self.steps(e, true);
                }
            }
            StepBody::While { cond, body } => {
                for lv in cond.paths() {
                    self.read(lv);
                }
                self.steps(body, true);
            }
        }
        if let Some(c) = self.post.get(step.label.as_str()).copied() {
            self.condition(c);
        }
    }

    fn condition(&mut self, c: &'a Condition) {
        for lv in c.expr.paths() {
            self.read(lv);
        }
    }

    fn read(&mut self, lv: &LValue) {
        let name = lv.root();
        if self.defined.contains(name) {
            return;
        }
        if self.maybe.contains(name) {
            self.diags.push(Diagnostic::warning(
                "possibly-undefined",
                format!("`{name}` is only assigned inside a conditional or loop body"),
                lv.span,
            ));
            return;
        }
        if self.table.auxiliary.contains_key(name) {
            self.diags.push(Diagnostic::warning(
                "use-before-definition",
                format!("`{name}` is read before the action that assigns it"),
                lv.span,
            ));
            return;
        }
        if self.opts.observations.contains(name) {
            return;
        }
        let Some(profile) = self.opts.profile else {
            // without a profile every unassigned name is taken as a system variable
            return;
        };
        if profile.contains(name) {
            return;
        }
        if self.call_args.contains(name) {
            self.diags.push(Diagnostic::warning(
                "unknown-system-variable",
                format!("system variable `{name}` is not known to profile `{}`", profile.id),
                lv.span,
            ));
        } else {
            let mut msg = format!("`{name}` is never assigned and is not a system variable");
            if let Some(close) = self.closest_auxiliary(name) {
                msg.push_str(&format!("; did you mean `{close}`?"));
            }
            self.diags
                .push(Diagnostic::error("undefined-variable", msg, lv.span));
        }
    }

    fn closest_auxiliary(&self, name: &str) -> Option<&str> {
        self.table
            .auxiliary
            .keys()
            .map(|k| (strsim::osa_distance(name, k), k.as_str()))
            .filter(|(d, _)| *d <= 2)
            .min()
            .map(|(_, k)| k)
    }
}

/// `duplicate-label`, `duplicate-condition` and `dangling-label`.
pub fn label_diagnostics(ast: &AttackDescription) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut actions = HashSet::new();
    for step in ast.all_steps() {
        if !actions.insert(step.label.as_str()) {
            diags.push(Diagnostic::error(
                "duplicate-label",
                format!("action label `{}` is already used", step.label),
                step.span,
            ));
        }
    }
    for (conds, what) in [
        (&ast.preconditions, "precondition"),
        (&ast.postconditions, "postcondition"),
    ] {
        let mut seen = HashSet::new();
        for c in conds {
            if !seen.insert(c.label.as_str()) {
                diags.push(Diagnostic::error(
                    "duplicate-condition",
                    format!("label `{}` already has a {what}", c.label),
                    c.span,
                ));
            }
            if !actions.contains(c.label.as_str()) {
                diags.push(Diagnostic::error(
                    "dangling-label",
                    format!("{what} label `{}` matches no action", c.label),
                    c.span,
                ));
            }
        }
    }
    diags
}

/// An action together with the conditions attached to it by label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelBinding<'a> {
    pub pre: Option<&'a Condition>,
    pub action: &'a AttackStep,
    pub post: Option<&'a Condition>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unresolved-labels: {}", .0.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "))]
pub struct UnresolvedLabels(pub Vec<Diagnostic>);

/// Map every action label (nested ones included) to its conditions.
pub fn label_bindings(
    ast: &AttackDescription,
) -> Result<BTreeMap<&str, LabelBinding<'_>>, UnresolvedLabels> {
    let diags = label_diagnostics(ast);
    if !diags.is_empty() {
        return Err(UnresolvedLabels(diags));
    }
    let pre = index_conditions(&ast.preconditions);
    let post = index_conditions(&ast.postconditions);
    Ok(ast
        .all_steps()
        .into_iter()
        .map(|action| {
            let label = action.label.as_str();
            (
                label,
                LabelBinding {
                    pre: pre.get(label).copied(),
                    action,
                    post: post.get(label).copied(),
                },
            )
        })
        .collect())
}
