//! Source text to [`AttackDescription`], with line-granular error recovery.
//!
//! A statement that fails to parse is reported and dropped; parsing resumes
//! on the next line. Line structure is significant: a statement ends at the
//! end of its line, except that `{ ... }` blocks span lines.

mod lexer;
mod printer;

use lexer::{tokenize, Tok, Token};
pub use printer::{call_to_string, expr_to_string, pretty_print};

use crate::ast::{
    is_reserved, oracle_arity, ArgValue, Argument, AttackDescription, AttackStep, BinOp, CallKind,
    CommandCall, Condition, Expr, LValue, Span, StepBody,
};
use crate::diagnostic::{sort_diagnostics, Diagnostic};

/// Result of parsing: a best-effort tree plus every syntax diagnostic.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub ast: AttackDescription,
    pub diagnostics: Vec<Diagnostic>,
}

impl Parsed {
    pub fn has_errors(&self) -> bool {
        crate::diagnostic::has_errors(&self.diagnostics)
    }
}

pub fn parse(source: &str) -> Parsed {
    let mut p = Parser {
        toks: tokenize(source),
        pos: 0,
        diags: Vec::new(),
    };
    let ast = p.description();
    let mut diagnostics = p.diags;
    sort_diagnostics(&mut diagnostics);
    Parsed { ast, diagnostics }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Pre,
    Actions,
    Post,
}

const HEADERS: [(&str, Section); 3] = [
    ("PreConditions", Section::Pre),
    ("Actions", Section::Actions),
    ("PostConditions", Section::Post),
];

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Tok::Newline) {
            self.bump();
        }
    }

    fn at_line_end(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Eof)
    }

    /// Drop the rest of the current line. Inside a block, stop before a `}`
    /// that would close it so the block structure survives.
    fn recover(&mut self, in_block: bool) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Newline | Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace if depth == 0 && in_block => return,
                Tok::RBrace => depth = depth.saturating_sub(1),
                _ => {}
            }
            self.bump();
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        let t = &self.toks[self.pos];
        match &t.tok {
            Tok::Error(msg) => Diagnostic::error("invalid-token", msg.clone(), t.span),
            Tok::RParen => Diagnostic::error(
                "unbalanced-parentheses",
                "unmatched closing parenthesis",
                t.span,
            ),
            other => Diagnostic::error(
                "syntax-error",
                format!("expected {expected}, found {}", describe(other)),
                t.span,
            ),
        }
    }

    fn header_at_cursor(&self) -> Option<Section> {
        if let (Tok::Ident(name), Tok::Colon) = (self.peek(), self.peek_at(1)) {
            HEADERS.iter().find(|(h, _)| h == name).map(|(_, s)| *s)
        } else {
            None
        }
    }

    fn description(&mut self) -> AttackDescription {
        let mut ast = AttackDescription::default();
        let mut current: Option<Section> = None;
        // headers that were either seen or already reported missing
        let mut accounted = [false; 3];
        let mut outside_reported = false;
        loop {
            self.skip_newlines();
            if matches!(self.peek(), Tok::Eof) {
                break;
            }
            if let Some(section) = self.header_at_cursor() {
                let idx = section_index(section);
                let span = self.span();
                self.bump();
                self.bump();
                if accounted[idx] {
                    self.diags.push(Diagnostic::error(
                        "duplicate-section",
                        format!("section `{}:` appears more than once", HEADERS[idx].0),
                        span,
                    ));
                } else if current.is_some_and(|c| section_index(c) > idx) {
                    self.diags.push(Diagnostic::error(
                        "section-order",
                        format!(
                            "section `{}:` must come before `{}:`",
                            HEADERS[idx].0,
                            HEADERS[section_index(current.unwrap())].0
                        ),
                        span,
                    ));
                }
                for (missing, done) in accounted.iter_mut().enumerate().take(idx) {
                    if !*done {
                        *done = true;
                        self.diags.push(Diagnostic::error(
                            "missing-section",
                            format!("missing section header `{}:`", HEADERS[missing].0),
                            span,
                        ));
                    }
                }
                accounted[idx] = true;
                current = Some(section);
                if !self.at_line_end() {
                    let d = self.unexpected("end of line after section header");
                    self.diags.push(d);
                    self.recover(false);
                }
                continue;
            }
            let result = match current {
                None => {
                    let span = self.span();
                    self.recover(false);
                    if outside_reported {
                        continue;
                    }
                    outside_reported = true;
                    Err(Diagnostic::error(
                        "missing-section",
                        "statement before the `PreConditions:` header",
                        span,
                    ))
                }
                Some(Section::Pre) => self
                    .condition()
                    .map(|c| ast.preconditions.push(c)),
                Some(Section::Post) => self
                    .condition()
                    .map(|c| ast.postconditions.push(c)),
                Some(Section::Actions) => self.step(false).map(|s| ast.actions.push(s)),
            };
            if let Err(d) = result {
                self.diags.push(d);
                self.recover(false);
            }
        }
        let end = self.span();
        for (idx, done) in accounted.iter().enumerate() {
            if !done {
                self.diags.push(Diagnostic::error(
                    "missing-section",
                    format!("missing section header `{}:`", HEADERS[idx].0),
                    end,
                ));
            }
        }
        ast
    }

    fn end_of_statement(&mut self, in_block: bool) -> PResult<()> {
        match self.peek() {
            Tok::Newline | Tok::Eof => Ok(()),
            Tok::RBrace if in_block => Ok(()),
            _ => Err(self.unexpected("end of statement")),
        }
    }

    fn label(&mut self) -> PResult<(String, Span)> {
        match (self.peek().clone(), self.peek_at(1)) {
            (Tok::Ident(name), Tok::Colon) if !is_reserved(&name) => {
                let span = self.span();
                self.bump();
                self.bump();
                Ok((name, span))
            }
            (Tok::Ident(name), Tok::Colon) => Err(Diagnostic::error(
                "reserved-word",
                format!("`{name}` is reserved and cannot be used as a label"),
                self.span(),
            )),
            _ => Err(Diagnostic::error(
                "missing-label",
                "statement must start with `label:`",
                self.span(),
            )),
        }
    }

    fn condition(&mut self) -> PResult<Condition> {
        let (label, start) = self.label()?;
        let expr = self.expr()?;
        let span = start.to(self.prev_span());
        self.end_of_statement(false)?;
        Ok(Condition { label, expr, span })
    }

    fn step(&mut self, in_block: bool) -> PResult<AttackStep> {
        let (label, start) = self.label()?;
        let step = match self.peek().clone() {
            Tok::Ident(kw) if kw == "if" => {
                self.bump();
                let cond = self.paren_expr()?;
                let then_branch = self.block()?;
                let else_branch = if matches!(self.peek(), Tok::Ident(w) if w == "else") {
                    self.bump();
                    Some(self.block()?)
                } else {
                    None
                };
                AttackStep {
                    label,
                    assign: None,
                    body: StepBody::If {
                        cond,
                        then_branch,
                        else_branch,
                    },
                    span: start,
                }
            }
            Tok::Ident(kw) if kw == "while" => {
                self.bump();
                let cond = self.paren_expr()?;
                let body = self.block()?;
                AttackStep {
                    label,
                    assign: None,
                    body: StepBody::While { cond, body },
                    span: start,
                }
            }
            _ => {
                let assign = if self.at_call_keyword() {
                    None
                } else {
                    let lv = self.lvalue()?;
                    if !self.eat(&Tok::Assign) {
                        return Err(self.unexpected("`=`"));
                    }
                    Some(lv)
                };
                let call = self.call()?;
                AttackStep {
                    label,
                    assign,
                    body: StepBody::Call(call),
                    span: start.to(self.prev_span()),
                }
            }
        };
        self.end_of_statement(in_block)?;
        Ok(step)
    }

    fn at_call_keyword(&self) -> bool {
        matches!(
            (self.peek(), self.peek_at(1)),
            (Tok::Ident(k), Tok::LParen) if k == "scan" || k == "exploit"
        )
    }

    fn paren_expr(&mut self) -> PResult<Expr> {
        let open = self.span();
        if !self.eat(&Tok::LParen) {
            return Err(self.unexpected("`(`"));
        }
        let e = self.expr()?;
        self.close_paren(open)?;
        Ok(e)
    }

    fn close_paren(&mut self, open: Span) -> PResult<()> {
        if self.eat(&Tok::RParen) {
            Ok(())
        } else if self.at_line_end() {
            Err(Diagnostic::error(
                "unbalanced-parentheses",
                "unclosed parenthesis",
                open,
            ))
        } else {
            Err(self.unexpected("`)`"))
        }
    }

    fn block(&mut self) -> PResult<Vec<AttackStep>> {
        let open = self.span();
        if !self.eat(&Tok::LBrace) {
            return Err(self.unexpected("`{`"));
        }
        let mut steps = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(steps);
                }
                Tok::Eof => {
                    return Err(Diagnostic::error(
                        "unbalanced-braces",
                        "block is never closed",
                        open,
                    ))
                }
                _ => match self.step(true) {
                    Ok(s) => steps.push(s),
                    Err(d) => {
                        self.diags.push(d);
                        self.recover(true);
                    }
                },
            }
        }
    }

    fn call(&mut self) -> PResult<CommandCall> {
        let kind = match self.peek() {
            Tok::Ident(k) if k == "scan" => CallKind::Scan,
            Tok::Ident(k) if k == "exploit" => CallKind::Exploit,
            _ => return Err(self.unexpected("`scan(` or `exploit(`")),
        };
        self.bump();
        let open = self.span();
        if !self.eat(&Tok::LParen) {
            return Err(self.unexpected("`(`"));
        }
        match (self.peek().clone(), self.peek_at(1)) {
            (Tok::Ident(t), Tok::Colon) if t == "type" => {
                self.bump();
                self.bump();
            }
            _ => {
                if self.at_line_end() {
                    return Err(Diagnostic::error(
                        "unbalanced-parentheses",
                        "unclosed parenthesis",
                        open,
                    ));
                }
                return Err(Diagnostic::error(
                    "missing-type",
                    "first argument of a call must be `type:`",
                    self.span(),
                ));
            }
        }
        let func_type = self.identifier("function type")?;
        let mut args: Vec<Argument> = Vec::new();
        while self.eat(&Tok::Comma) {
            let span = self.span();
            let name = match (self.peek().clone(), self.peek_at(1)) {
                (Tok::Ident(n), Tok::Colon) => {
                    self.bump();
                    self.bump();
                    n
                }
                _ => return Err(self.unexpected("`name:` argument")),
            };
            if name == "type" || args.iter().any(|a| a.name == name) {
                return Err(Diagnostic::error(
                    "duplicate-argument",
                    format!("argument `{name}` given more than once"),
                    span,
                ));
            }
            let value = self.arg_value()?;
            args.push(Argument {
                name,
                value,
                span: span.to(self.prev_span()),
            });
        }
        self.close_paren(open)?;
        Ok(CommandCall {
            kind,
            func_type,
            args,
        })
    }

    fn arg_value(&mut self) -> PResult<ArgValue> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(ArgValue::Text(s))
            }
            Tok::Int(_) | Tok::Op(BinOp::Sub) => match self.int_literal()? {
                Expr::Int(n) => Ok(ArgValue::Int(n)),
                _ => unreachable!(),
            },
            Tok::Ident(_) => Ok(ArgValue::Var(self.lvalue()?)),
            _ => Err(self.unexpected("argument value")),
        }
    }

    fn identifier(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) if !is_reserved(&name) => {
                self.bump();
                Ok(name)
            }
            Tok::Ident(name) => Err(Diagnostic::error(
                "reserved-word",
                format!("`{name}` is reserved"),
                self.span(),
            )),
            _ => Err(self.unexpected(what)),
        }
    }

    fn lvalue(&mut self) -> PResult<LValue> {
        let start = self.span();
        let mut segments = vec![self.identifier("identifier")?];
        while self.peek() == &Tok::Dot {
            self.bump();
            segments.push(self.identifier("field name")?);
        }
        Ok(LValue {
            segments,
            span: start.to(self.prev_span()),
        })
    }

    // expr := or ; or := and ("or" and)* ; and := not ("and" not)*
    // not := "not" not | cmp ; cmp := add (cmpop add)* ; add := mul ((+|-) mul)*
    // mul := primary ((*|/) primary)*
    fn expr(&mut self) -> PResult<Expr> {
        self.logical(BinOp::Or)
    }

    fn logical(&mut self, op: BinOp) -> PResult<Expr> {
        let next = |p: &mut Self| {
            if op == BinOp::Or {
                p.logical(BinOp::And)
            } else {
                p.not_expr()
            }
        };
        let mut lhs = next(self)?;
        while matches!(self.peek(), Tok::Ident(w) if w == op.symbol()) {
            self.bump();
            let rhs = next(self)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if matches!(self.peek(), Tok::Ident(w) if w == "not") {
            self.bump();
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.binary_level(4)
    }

    fn binary_level(&mut self, prec: u8) -> PResult<Expr> {
        if prec > 6 {
            return self.primary();
        }
        let mut lhs = self.binary_level(prec + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Op(op) if op.precedence() == prec => *op,
                _ => break,
            };
            self.bump();
            let rhs = self.binary_level(prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn int_literal(&mut self) -> PResult<Expr> {
        let negative = self.eat(&Tok::Op(BinOp::Sub));
        let span = self.span();
        let Tok::Int(mag) = self.peek().clone() else {
            return Err(self.unexpected("integer"));
        };
        self.bump();
        let value = if negative {
            0i64.checked_sub_unsigned(mag)
        } else {
            i64::try_from(mag).ok()
        };
        value.map(Expr::Int).ok_or_else(|| {
            Diagnostic::error("invalid-token", "integer literal out of range", span)
        })
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Text(s))
            }
            Tok::Int(_) => self.int_literal(),
            Tok::Op(BinOp::Sub) if matches!(self.peek_at(1), Tok::Int(_)) => self.int_literal(),
            Tok::LParen => self.paren_expr(),
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(Expr::Bool(w == "true"))
            }
            Tok::Ident(w) if w == "Oracle" => self.oracle(),
            Tok::Ident(_) => Ok(Expr::Path(self.lvalue()?)),
            _ => Err(self.unexpected("expression")),
        }
    }

    fn oracle(&mut self) -> PResult<Expr> {
        let start = self.span();
        self.bump();
        if !self.eat(&Tok::Dot) {
            return Err(self.unexpected("`.` after `Oracle`"));
        }
        let name_span = self.span();
        let Tok::Ident(name) = self.peek().clone() else {
            return Err(self.unexpected("oracle name"));
        };
        self.bump();
        let open = self.span();
        if !self.eat(&Tok::LParen) {
            return Err(self.unexpected("`(`"));
        }
        let mut args = Vec::new();
        if self.peek() != &Tok::RParen && !self.at_line_end() {
            args.push(self.expr()?);
            while self.eat(&Tok::Comma) {
                args.push(self.expr()?);
            }
        }
        self.close_paren(open)?;
        match oracle_arity(&name) {
            None => Err(Diagnostic::error(
                "unknown-oracle",
                format!("unknown oracle `{name}`"),
                name_span,
            )),
            Some(n) if n != args.len() => Err(Diagnostic::error(
                "oracle-arity",
                format!("oracle `{name}` takes {n} argument(s), got {}", args.len()),
                start.to(self.prev_span()),
            )),
            Some(_) => Ok(Expr::Oracle { name, args }),
        }
    }
}

fn section_index(s: Section) -> usize {
    HEADERS.iter().position(|(_, h)| *h == s).unwrap()
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::Int(n) => format!("integer {n}"),
        Tok::Colon => "`:`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Assign => "`=`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::Op(op) => format!("`{}`", op.symbol()),
        Tok::Newline => "end of line".into(),
        Tok::Eof => "end of input".into(),
        Tok::Error(e) => e.clone(),
    }
}

#[cfg(test)]
mod tests;
