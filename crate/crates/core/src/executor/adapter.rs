//! Interface between the executor and whatever actually runs commands.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::clock::Clock;
use crate::value::Value;

/// One fully resolved command handed to a session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation<'a> {
    pub session: &'a str,
    pub tool: &'a str,
    pub parameters: &'a [String],
    /// Absolute clock time by which the command must have finished.
    pub deadline_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdapterOutput {
    /// Exit status; nonzero means the command failed.
    pub status: i32,
    pub output: String,
    /// Typed result; when `None` the output text is interpreted.
    pub value: Option<Value>,
    /// Published observations, written into run variables.
    pub observations: BTreeMap<String, Value>,
    /// Name of a session this command opened.
    pub spawn: Option<String>,
    /// The session that ran this command is gone afterwards.
    pub close: bool,
}

impl AdapterOutput {
    pub fn ok(output: impl Into<String>) -> Self {
        AdapterOutput {
            output: output.into(),
            ..Default::default()
        }
    }

    pub fn value(value: Value) -> Self {
        AdapterOutput {
            output: value.to_text(),
            value: Some(value),
            ..Default::default()
        }
    }

    pub fn failed(status: i32, output: impl Into<String>) -> Self {
        AdapterOutput {
            status,
            output: output.into(),
            ..Default::default()
        }
    }
}

/// A live execution context (shell, debug bridge, reverse shell).
///
/// `Err` is an adapter fault, as opposed to a command that ran and exited
/// nonzero; both mark the report entry FAILED.
pub trait Session: Send {
    fn dispatch(&mut self, invocation: &Invocation<'_>) -> Result<AdapterOutput, String>;
}

/// Source of sessions, oracles and time for one run.
pub trait AdapterRegistry: Send {
    fn clock(&self) -> Arc<dyn Clock>;

    /// Sessions that exist before the first command, e.g. the host `bash`.
    fn initial_sessions(&mut self) -> Vec<(String, Box<dyn Session>)>;

    /// Called when a command output asks for a new session.
    fn open_session(&mut self, name: &str) -> Result<Box<dyn Session>, String>;

    fn oracle(&mut self, name: &str, args: &[Value]) -> Result<bool, String>;

    /// Variable names this registry may publish as observations.
    fn observation_names(&self) -> BTreeSet<String> {
        BTreeSet::new()
    }
}
