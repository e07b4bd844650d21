use std::fmt::Write;

use crate::ast::{
    ArgValue, AttackDescription, AttackStep, CommandCall, Condition, Expr, StepBody,
    NOT_PRECEDENCE,
};

const INDENT: &str = "  ";

/// Render a description in canonical form: one statement per line, two-space
/// indentation, `key:value` arguments.
pub fn pretty_print(ast: &AttackDescription) -> String {
    let mut out = String::new();
    out.push_str("PreConditions:\n");
    for c in &ast.preconditions {
        write_condition(&mut out, c);
    }
    out.push_str("Actions:\n");
    for s in &ast.actions {
        write_step(&mut out, s, 1);
    }
    out.push_str("PostConditions:\n");
    for c in &ast.postconditions {
        write_condition(&mut out, c);
    }
    out
}

fn write_condition(out: &mut String, c: &Condition) {
    let _ = writeln!(out, "{INDENT}{}: {}", c.label, expr_to_string(&c.expr));
}

fn write_step(out: &mut String, step: &AttackStep, depth: usize) {
    let pad = INDENT.repeat(depth);
    let _ = write!(out, "{pad}{}: ", step.label);
    match &step.body {
        StepBody::Call(call) => {
            if let Some(target) = &step.assign {
                let _ = write!(out, "{target} = ");
            }
            out.push_str(&call_to_string(call));
            out.push('\n');
        }
        StepBody::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = writeln!(out, "if ({}) {{", expr_to_string(cond));
            for s in then_branch {
                write_step(out, s, depth + 1);
            }
            match else_branch {
                Some(e) => {
                    let _ = writeln!(out, "{pad}}} else {{");
                    for s in e {
                        write_step(out, s, depth + 1);
                    }
                    let _ = writeln!(out, "{pad}}}");
                }
                None => {
                    let _ = writeln!(out, "{pad}}}");
                }
            }
        }
        StepBody::While { cond, body } => {
            let _ = writeln!(out, "while ({}) {{", expr_to_string(cond));
            for s in body {
                write_step(out, s, depth + 1);
            }
            let _ = writeln!(out, "{pad}}}");
        }
    }
}

pub fn call_to_string(call: &CommandCall) -> String {
    let mut s = format!("{}(type:{}", call.kind, call.func_type);
    for arg in &call.args {
        let _ = write!(s, ", {}:{}", arg.name, arg_to_string(&arg.value));
    }
    s.push(')');
    s
}

fn arg_to_string(v: &ArgValue) -> String {
    match v {
        ArgValue::Text(t) => quote(t),
        ArgValue::Int(n) => n.to_string(),
        ArgValue::Var(lv) => lv.dotted(),
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    match e {
        Expr::Text(t) => out.push_str(&quote(t)),
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Expr::Path(lv) => out.push_str(&lv.dotted()),
        Expr::Oracle { name, args } => {
            let _ = write!(out, "Oracle.{name}(");
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
        Expr::Not(inner) => {
            let wrap = NOT_PRECEDENCE < min_prec;
            if wrap {
                out.push('(');
            }
            out.push_str("not ");
            write_expr(out, inner, NOT_PRECEDENCE);
            if wrap {
                out.push(')');
            }
        }
        Expr::Binary(op, lhs, rhs) => {
            let p = op.precedence();
            let wrap = p < min_prec;
            if wrap {
                out.push('(');
            }
            write_expr(out, lhs, p);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, rhs, p + 1);
            if wrap {
                out.push(')');
            }
        }
    }
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}
