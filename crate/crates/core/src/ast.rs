//! Syntax tree for attack descriptions.
//!
//! Every node carries a [`Span`] pointing back into the source. Spans are
//! excluded from structural comparison via [`AttackDescription::strip_spans`],
//! since pretty-printing moves nodes around.

use std::fmt;

/// 1-based source position of a node or diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub column_start: usize,
    pub column_end: usize,
}

impl Span {
    pub fn new(line: usize, column_start: usize, column_end: usize) -> Self {
        debug_assert!(column_start <= column_end);
        Span {
            line,
            column_start,
            column_end,
        }
    }

    /// Smallest span covering both, assuming `other` does not start before `self`.
    pub fn to(self, other: Span) -> Span {
        if other.line == self.line {
            Span::new(self.line, self.column_start, other.column_end.max(self.column_end))
        } else {
            self
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column_start)
    }
}

/// A parsed attack description: three labeled sections in fixed order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttackDescription {
    pub preconditions: Vec<Condition>,
    pub actions: Vec<AttackStep>,
    pub postconditions: Vec<Condition>,
}

impl AttackDescription {
    /// Copy of the tree with every span reset, for structural comparison.
    pub fn strip_spans(&self) -> AttackDescription {
        let mut out = self.clone();
        for c in out.preconditions.iter_mut().chain(out.postconditions.iter_mut()) {
            c.strip_spans();
        }
        for a in &mut out.actions {
            a.strip_spans();
        }
        out
    }

    /// All steps, depth first, in source order (nested block steps included).
    pub fn all_steps(&self) -> Vec<&AttackStep> {
        fn walk<'a>(steps: &'a [AttackStep], out: &mut Vec<&'a AttackStep>) {
            for s in steps {
                out.push(s);
                match &s.body {
                    StepBody::Call(_) => {}
                    StepBody::If {
                        then_branch,
                        else_branch,
                        ..
                    } => {
                        walk(then_branch, out);
                        if let Some(e) = else_branch {
                            walk(e, out);
                        }
                    }
                    StepBody::While { body, .. } => walk(body, out),
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.actions, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub label: String,
    pub expr: Expr,
    pub span: Span,
}

impl Condition {
    fn strip_spans(&mut self) {
        self.span = Span::default();
        self.expr.strip_spans();
    }
}

/// One labeled statement in the `Actions:` section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackStep {
    pub label: String,
    /// Only ever set for [`StepBody::Call`].
    pub assign: Option<LValue>,
    pub body: StepBody,
    pub span: Span,
}

impl AttackStep {
    fn strip_spans(&mut self) {
        self.span = Span::default();
        if let Some(lv) = &mut self.assign {
            lv.span = Span::default();
        }
        match &mut self.body {
            StepBody::Call(call) => {
                for arg in &mut call.args {
                    arg.span = Span::default();
                    if let ArgValue::Var(lv) = &mut arg.value {
                        lv.span = Span::default();
                    }
                }
            }
            StepBody::If {
                cond,
                then_branch,
                else_branch,
            } => {
                cond.strip_spans();
                then_branch.iter_mut().for_each(AttackStep::strip_spans);
                if let Some(e) = else_branch {
                    e.iter_mut().for_each(AttackStep::strip_spans);
                }
            }
            StepBody::While { cond, body } => {
                cond.strip_spans();
                body.iter_mut().for_each(AttackStep::strip_spans);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepBody {
    Call(CommandCall),
    If {
        cond: Expr,
        then_branch: Vec<AttackStep>,
        else_branch: Option<Vec<AttackStep>>,
    },
    While {
        cond: Expr,
        body: Vec<AttackStep>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CallKind {
    Scan,
    Exploit,
}

impl CallKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CallKind::Scan => "scan",
            CallKind::Exploit => "exploit",
        }
    }
}

impl fmt::Display for CallKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `scan(type:X, ...)` or `exploit(type:X, ...)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandCall {
    pub kind: CallKind,
    pub func_type: String,
    pub args: Vec<Argument>,
}

impl CommandCall {
    pub fn arg(&self, name: &str) -> Option<&ArgValue> {
        self.args.iter().find(|a| a.name == name).map(|a| &a.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Argument {
    pub name: String,
    pub value: ArgValue,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgValue {
    Text(String),
    Int(i64),
    Var(LValue),
}

/// Variable or dotted field path, e.g. `mytarget.ip`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LValue {
    pub segments: Vec<String>,
    pub span: Span,
}

impl LValue {
    pub fn new<S: Into<String>>(segments: impl IntoIterator<Item = S>) -> Self {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        assert!(!segments.is_empty(), "lvalue needs at least one segment");
        LValue {
            segments,
            span: Span::default(),
        }
    }

    pub fn root(&self) -> &str {
        &self.segments[0]
    }

    pub fn dotted(&self) -> String {
        self.segments.join(".")
    }
}

impl fmt::Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dotted())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub const ALL: [BinOp; 12] = [
        BinOp::Or,
        BinOp::And,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        BinOp::ALL.into_iter().find(|op| op.symbol() == s)
    }

    /// Binding strength; `not` sits between `and` (2) and comparisons (4).
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::Or | BinOp::And)
    }
}

pub const NOT_PRECEDENCE: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Text(String),
    Int(i64),
    Bool(bool),
    /// Variable or field read. In boolean position this is a truthiness test.
    Path(LValue),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Oracle { name: String, args: Vec<Expr> },
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Path(LValue::new(name.split('.')))
    }

    fn strip_spans(&mut self) {
        match self {
            Expr::Path(lv) => lv.span = Span::default(),
            Expr::Not(e) => e.strip_spans(),
            Expr::Binary(_, l, r) => {
                l.strip_spans();
                r.strip_spans();
            }
            Expr::Oracle { args, .. } => args.iter_mut().for_each(Expr::strip_spans),
            Expr::Text(_) | Expr::Int(_) | Expr::Bool(_) => {}
        }
    }

    /// Every variable path read by this expression, left to right.
    pub fn paths(&self) -> Vec<&LValue> {
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a LValue>) {
            match e {
                Expr::Path(lv) => out.push(lv),
                Expr::Not(inner) => walk(inner, out),
                Expr::Binary(_, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                Expr::Oracle { args, .. } => args.iter().for_each(|a| walk(a, out)),
                Expr::Text(_) | Expr::Int(_) | Expr::Bool(_) => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

/// Oracles known to the language, with their argument counts.
pub const ORACLES: &[(&str, usize)] = &[("CAN_MESSAGE", 1)];

pub fn oracle_arity(name: &str) -> Option<usize> {
    ORACLES.iter().find(|(n, _)| *n == name).map(|(_, a)| *a)
}

/// Words that cannot be used as labels or variable names.
pub const RESERVED_WORDS: &[&str] = &[
    "PreConditions",
    "Actions",
    "PostConditions",
    "scan",
    "exploit",
    "if",
    "else",
    "while",
    "and",
    "or",
    "not",
    "true",
    "false",
    "Oracle",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED_WORDS.contains(&word)
}

pub fn is_identifier(word: &str) -> bool {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
