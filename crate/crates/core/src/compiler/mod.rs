//! Lowering of checked descriptions into executable JSON command lists.

pub mod condition;
pub mod mapping;
pub mod template;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyzer::{label_bindings, LabelBinding, UnresolvedLabels};
use crate::ast::{is_identifier, ArgValue, AttackDescription, AttackStep, CommandCall, Condition, StepBody};
pub use mapping::{load_tool_mapping, MappingEntry, MappingError, Template, ToolMapping};
use template::{escape_braces, Modifier, Piece, Placeholder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Pre,
    Attack,
    Post,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Pre => "pre",
            Phase::Attack => "attack",
            Phase::Post => "post",
        }
    }
}

/// Environment name of the executor's built-in tools.
pub const BUILTIN_ENV: &str = "axe";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompiledCommand {
    pub environment: String,
    pub tool: String,
    pub parameters: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Phase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assign: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<Vec<CompiledCommand>>,
    #[serde(default, rename = "else", skip_serializing_if = "Option::is_none")]
    pub else_body: Option<Vec<CompiledCommand>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
}

impl CompiledCommand {
    pub fn is_control(&self) -> bool {
        self.environment == BUILTIN_ENV && matches!(self.tool.as_str(), "if" | "while")
    }

    fn validate(&self, at: &str) -> Result<(), InvalidScript> {
        let err = |msg: String| Err(InvalidScript(format!("{at}: {msg}")));
        if self.environment.is_empty() {
            return err("empty `environment`".into());
        }
        if self.tool.is_empty() {
            return err("empty `tool`".into());
        }
        if let Some(a) = &self.assign {
            if !a.split('.').all(is_identifier) {
                return err(format!("`assign` {a:?} is not a variable path"));
            }
        }
        if let Some(l) = &self.label {
            if !is_identifier(l) {
                return err(format!("`label` {l:?} is not an identifier"));
            }
        }
        if self.is_control() {
            if self.body.is_none() {
                return err(format!("`{}` without `body`", self.tool));
            }
            if self.tool == "while" && self.else_body.is_some() {
                return err("`while` cannot have `else`".into());
            }
        } else if self.body.is_some() || self.else_body.is_some() {
            return err("`body`/`else` only allowed on axe if/while".into());
        }
        for (name, block) in [("body", &self.body), ("else", &self.else_body)] {
            for (i, c) in block.iter().flatten().enumerate() {
                c.validate(&format!("{at}.{name}[{i}]"))?;
            }
        }
        Ok(())
    }

    /// Number of commands in this subtree, control groups included.
    pub fn count(&self) -> usize {
        1 + [&self.body, &self.else_body]
            .into_iter()
            .flatten()
            .flatten()
            .map(CompiledCommand::count)
            .sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid-script: {0}")]
pub struct InvalidScript(pub String);

/// The executor's input document: `{"execute": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompiledScript {
    pub execute: Vec<CompiledCommand>,
}

impl CompiledScript {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("script serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("script serializes")
    }

    pub fn from_json(document: &str) -> Result<CompiledScript, InvalidScript> {
        let value: serde_json::Value =
            serde_json::from_str(document).map_err(|e| InvalidScript(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<CompiledScript, InvalidScript> {
        let script: CompiledScript =
            serde_json::from_value(value).map_err(|e| InvalidScript(e.to_string()))?;
        script.validate()?;
        Ok(script)
    }

    pub fn validate(&self) -> Result<(), InvalidScript> {
        for (i, c) in self.execute.iter().enumerate() {
            c.validate(&format!("execute[{i}]"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unknown-function: action `{label}` uses `{key}`, which the tool mapping does not define")]
    UnknownFunction { label: String, key: String },
    #[error("template-arity: action `{label}`: {reason}")]
    TemplateArity { label: String, reason: String },
    #[error(transparent)]
    UnresolvedLabels(#[from] UnresolvedLabels),
}

impl CompileError {
    pub fn code(&self) -> &'static str {
        match self {
            CompileError::UnknownFunction { .. } => "unknown-function",
            CompileError::TemplateArity { .. } => "template-arity",
            CompileError::UnresolvedLabels(_) => "unresolved-labels",
        }
    }
}

/// Lower `ast` using `mapping`. Each action becomes `[pre?, attack, post?]`.
pub fn compile(ast: &AttackDescription, mapping: &ToolMapping) -> Result<CompiledScript, CompileError> {
    let bindings = label_bindings(ast)?;
    let execute = compile_steps(&ast.actions, &bindings, mapping)?;
    Ok(CompiledScript { execute })
}

fn compile_steps(
    steps: &[AttackStep],
    bindings: &std::collections::BTreeMap<&str, LabelBinding<'_>>,
    mapping: &ToolMapping,
) -> Result<Vec<CompiledCommand>, CompileError> {
    let mut out = Vec::new();
    for step in steps {
        let binding = bindings.get(step.label.as_str());
        if let Some(pre) = binding.and_then(|b| b.pre) {
            out.push(compile_condition(pre, Phase::Pre));
        }
        out.push(match &step.body {
            StepBody::Call(call) => lower_call(step, call, mapping)?,
            StepBody::If {
                cond,
                then_branch,
                else_branch,
            } => CompiledCommand {
                environment: BUILTIN_ENV.into(),
                tool: "if".into(),
                parameters: condition::encode(cond),
                label: Some(step.label.clone()),
                phase: Some(Phase::Attack),
                assign: None,
                body: Some(compile_steps(then_branch, bindings, mapping)?),
                else_body: else_branch
                    .as_deref()
                    .map(|e| compile_steps(e, bindings, mapping))
                    .transpose()?,
                timeout_ms: None,
            },
            StepBody::While { cond, body } => CompiledCommand {
                environment: BUILTIN_ENV.into(),
                tool: "while".into(),
                parameters: condition::encode(cond),
                label: Some(step.label.clone()),
                phase: Some(Phase::Attack),
                assign: None,
                body: Some(compile_steps(body, bindings, mapping)?),
                else_body: None,
                timeout_ms: None,
            },
        });
        if let Some(post) = binding.and_then(|b| b.post) {
            out.push(compile_condition(post, Phase::Post));
        }
    }
    Ok(out)
}

/// A condition as an `axe`/`assert` command.
pub fn compile_condition(cond: &Condition, phase: Phase) -> CompiledCommand {
    CompiledCommand {
        environment: BUILTIN_ENV.into(),
        tool: "assert".into(),
        parameters: condition::encode(&cond.expr),
        label: Some(cond.label.clone()),
        phase: Some(phase),
        assign: None,
        body: None,
        else_body: None,
        timeout_ms: None,
    }
}

const TIMEOUT_ARG: &str = "timeout_ms";

fn lower_call(
    step: &AttackStep,
    call: &CommandCall,
    mapping: &ToolMapping,
) -> Result<CompiledCommand, CompileError> {
    let key = format!("{}:{}", call.kind, call.func_type);
    let arity = |reason: String| CompileError::TemplateArity {
        label: step.label.clone(),
        reason,
    };
    let entry = mapping
        .get(call.kind, &call.func_type)
        .ok_or_else(|| CompileError::UnknownFunction {
            label: step.label.clone(),
            key: key.clone(),
        })?;
    let mut timeout_ms = None;
    for arg in &call.args {
        if arg.name == TIMEOUT_ARG {
            match arg.value {
                ArgValue::Int(n) if n > 0 => timeout_ms = Some(n as u64),
                _ => return Err(arity(format!("`{TIMEOUT_ARG}` must be a positive integer"))),
            }
        } else if !entry.args.contains(&arg.name) {
            return Err(arity(format!("`{key}` does not take argument `{}`", arg.name)));
        }
    }
    let template = entry
        .variants
        .iter()
        .find(|t| t.required_args(entry).iter().all(|a| call.arg(a).is_some()))
        .ok_or_else(|| {
            let supplied: Vec<&str> = call.args.iter().map(|a| a.name.as_str()).collect();
            arity(format!(
                "no template of `{key}` fits the arguments [{}]",
                supplied.join(", ")
            ))
        })?;
    let lower = Lowering { entry, call };
    let environment = lower.single(&template.environment).map_err(&arity)?;
    let tool = lower.single(&template.tool).map_err(&arity)?;
    if environment.is_empty() || tool.is_empty() {
        return Err(arity("environment or tool renders empty".into()));
    }
    let mut parameters = Vec::new();
    for item in &template.parameters {
        parameters.extend(lower.item(item).map_err(&arity)?);
    }
    Ok(CompiledCommand {
        environment,
        tool,
        parameters,
        label: Some(step.label.clone()),
        phase: Some(Phase::Attack),
        assign: step.assign.as_ref().map(|lv| lv.dotted()),
        body: None,
        else_body: None,
        timeout_ms,
    })
}

struct Lowering<'a> {
    entry: &'a MappingEntry,
    call: &'a CommandCall,
}

/// What a placeholder becomes after argument substitution.
enum Filled {
    Text(String),
    Words(Vec<String>),
    Dropped,
}

impl Lowering<'_> {
    fn single(&self, pieces: &[Piece]) -> Result<String, String> {
        let mut out = String::new();
        for p in pieces {
            match p {
                Piece::Literal(s) => out.push_str(&escape_braces(s)),
                Piece::Hole(h) => match self.fill(h)? {
                    Filled::Text(s) => out.push_str(&s),
                    Filled::Words(_) | Filled::Dropped => {
                        return Err(format!("{h} cannot be used here"))
                    }
                },
            }
        }
        Ok(out)
    }

    /// One template parameter: zero items if an optional argument is
    /// missing, several for a literal `|tail`, otherwise one.
    fn item(&self, pieces: &[Piece]) -> Result<Vec<String>, String> {
        let mut out = String::new();
        for p in pieces {
            match p {
                Piece::Literal(s) => out.push_str(&escape_braces(s)),
                Piece::Hole(h) => match self.fill(h)? {
                    Filled::Text(s) => out.push_str(&s),
                    Filled::Words(words) => return Ok(words),
                    Filled::Dropped => return Ok(Vec::new()),
                },
            }
        }
        Ok(vec![out])
    }

    fn fill(&self, h: &Placeholder) -> Result<Filled, String> {
        if !self.entry.args.contains(h.root()) {
            return Ok(Filled::Text(runtime_placeholder(&h.path, h.modifier)));
        }
        let Some(value) = self.call.arg(h.root()) else {
            return if h.optional {
                Ok(Filled::Dropped)
            } else {
                Err(format!("argument `{}` is required by {h}", h.root()))
            };
        };
        let literal = match value {
            ArgValue::Var(lv) => {
                let path: Vec<String> = lv.segments.iter().chain(&h.path[1..]).cloned().collect();
                return Ok(Filled::Text(runtime_placeholder(&path, h.modifier)));
            }
            ArgValue::Text(s) => s.clone(),
            ArgValue::Int(n) => n.to_string(),
        };
        if h.path.len() > 1 {
            return Err(format!("argument `{}` is a literal and has no field for {h}", h.root()));
        }
        Ok(match h.modifier {
            None => Filled::Text(escape_braces(&literal)),
            Some(Modifier::Head) => {
                Filled::Text(escape_braces(&Modifier::Head.apply(&literal)[0]))
            }
            Some(Modifier::Tail) => Filled::Words(
                Modifier::Tail
                    .apply(&literal)
                    .iter()
                    .map(|w| escape_braces(w))
                    .collect(),
            ),
        })
    }
}

fn runtime_placeholder(path: &[String], modifier: Option<Modifier>) -> String {
    let p = Placeholder {
        path: path.to_vec(),
        optional: false,
        modifier,
    };
    p.to_string()
}
