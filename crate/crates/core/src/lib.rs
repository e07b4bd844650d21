//! ALIA: an agnostic language for describing attacks on vehicles, and the
//! engine that runs them.
//!
//! The pipeline is [`parse`] → [`check`] → [`compile`] → [`execute`]. Scripts
//! stay free of vehicle specifics; a [`SutProfile`] supplies concrete values
//! at run time.

pub mod analyzer;
#[cfg(any(test, feature = "arbitrary"))]
pub mod arbitrary;
pub mod ast;
pub mod clock;
pub mod compiler;
pub mod corpus;
pub mod diagnostic;
pub mod executor;
pub mod frame;
pub mod kb;
pub mod parser;
pub mod sim;
pub mod value;

pub use analyzer::{check, check_with, CheckOptions};
pub use ast::{AttackDescription, Span};
pub use clock::{Clock, ClockMode, SimClock, WallClock};
pub use compiler::{
    compile, load_tool_mapping, CompileError, CompiledCommand, CompiledScript, InvalidScript, Phase,
    ToolMapping,
};
pub use diagnostic::{Diagnostic, Severity};
pub use executor::{execute, ExecOptions, ExecutionReport, ReportEntry, Status};
pub use frame::{CanFrame, CanFrameText};
pub use kb::{load_profile, ProfileError, SutProfile};
pub use parser::{parse, pretty_print};
pub use value::Value;
