//! Prefix serialization of condition expressions into assertion parameters.
//!
//! Operators come first, followed by their operands: `uesr == "root"`
//! becomes `["==", "{uesr}", "root"]`. Operands in boolean position that are
//! not themselves boolean (a bare variable, a literal, arithmetic) are wrapped
//! in `truthy`. Variables appear as `{name}`. Literal text that could be
//! mistaken for an operator, a placeholder or an integer is prefixed with a
//! backslash.

use thiserror::Error;

use crate::ast::{oracle_arity, BinOp, Expr};
use crate::value::Value;

const KEYWORDS: &[&str] = &[
    "and", "or", "not", "truthy", "oracle", "true", "false", "==", "!=", "<", "<=", ">", ">=", "+",
    "-", "*", "/",
];

/// Encode a condition for an `axe`/`assert` command.
pub fn encode(expr: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    encode_bool(expr, &mut out);
    out
}

fn encode_bool(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Binary(op, _, _) if !is_arithmetic(*op) => encode_value(e, out),
        Expr::Not(_) | Expr::Oracle { .. } | Expr::Bool(_) => encode_value(e, out),
        _ => {
            out.push("truthy".into());
            encode_value(e, out);
        }
    }
}

fn encode_value(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Text(s) => out.push(escape_literal(s)),
        Expr::Int(n) => out.push(n.to_string()),
        Expr::Bool(b) => out.push(b.to_string()),
        Expr::Path(lv) => out.push(format!("{{{}}}", lv.dotted())),
        Expr::Not(inner) => {
            out.push("not".into());
            encode_bool(inner, out);
        }
        Expr::Binary(op, l, r) => {
            out.push(op.symbol().into());
            if op.is_logical() {
                encode_bool(l, out);
                encode_bool(r, out);
            } else {
                encode_value(l, out);
                encode_value(r, out);
            }
        }
        Expr::Oracle { name, args } => {
            out.push("oracle".into());
            out.push(name.clone());
            for a in args {
                encode_value(a, out);
            }
        }
    }
}

fn is_arithmetic(op: BinOp) -> bool {
    matches!(op, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
}

pub fn escape_literal(s: &str) -> String {
    let needs = KEYWORDS.contains(&s)
        || s.starts_with('{')
        || s.starts_with('\\')
        || s.parse::<i64>().is_ok();
    if needs {
        format!("\\{s}")
    } else {
        s.to_string()
    }
}

/// Decoded assertion tree, evaluated by the executor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assertion {
    Literal(Value),
    Var(Vec<String>),
    Truthy(Box<Assertion>),
    Not(Box<Assertion>),
    Binary(BinOp, Box<Assertion>, Box<Assertion>),
    Oracle { name: String, args: Vec<Assertion> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad-assertion: {0}")]
pub struct BadAssertion(pub String);

pub fn decode(tokens: &[String]) -> Result<Assertion, BadAssertion> {
    let mut pos = 0;
    let tree = decode_at(tokens, &mut pos, 0)?;
    if pos != tokens.len() {
        return Err(BadAssertion(format!(
            "{} trailing parameter(s)",
            tokens.len() - pos
        )));
    }
    Ok(tree)
}

const MAX_DEPTH: usize = 256;

fn decode_at(tokens: &[String], pos: &mut usize, depth: usize) -> Result<Assertion, BadAssertion> {
    if depth > MAX_DEPTH {
        return Err(BadAssertion("expression nested too deeply".into()));
    }
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| BadAssertion("missing operand".into()))?;
    *pos += 1;
    let next = |pos: &mut usize| decode_at(tokens, pos, depth + 1).map(Box::new);
    Ok(match tok.as_str() {
        "truthy" => Assertion::Truthy(next(pos)?),
        "not" => Assertion::Not(next(pos)?),
        "true" => Assertion::Literal(Value::Boolean(true)),
        "false" => Assertion::Literal(Value::Boolean(false)),
        "oracle" => {
            let name = tokens
                .get(*pos)
                .ok_or_else(|| BadAssertion("missing oracle name".into()))?
                .clone();
            *pos += 1;
            let arity = oracle_arity(&name)
                .ok_or_else(|| BadAssertion(format!("unknown oracle `{name}`")))?;
            let mut args = Vec::with_capacity(arity);
            for _ in 0..arity {
                args.push(*next(pos)?);
            }
            Assertion::Oracle { name, args }
        }
        t => {
            if let Some(op) = BinOp::from_symbol(t) {
                let l = next(pos)?;
                let r = next(pos)?;
                Assertion::Binary(op, l, r)
            } else if let Some(lit) = t.strip_prefix('\\') {
                Assertion::Literal(Value::Text(lit.to_string()))
            } else if let Some(path) = placeholder_path(t) {
                Assertion::Var(path)
            } else if let Ok(n) = t.parse::<i64>() {
                Assertion::Literal(Value::Integer(n))
            } else {
                Assertion::Literal(Value::Text(t.to_string()))
            }
        }
    })
}

fn placeholder_path(t: &str) -> Option<Vec<String>> {
    let inner = t.strip_prefix('{')?.strip_suffix('}')?;
    let path: Vec<String> = inner.split('.').map(str::to_string).collect();
    path.iter()
        .all(|s| crate::ast::is_identifier(s))
        .then_some(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arbitrary;
    use proptest::prelude::*;

    fn enc(src: &str) -> Vec<String> {
        let p = crate::parser::parse(&format!("PreConditions:\n  l: {src}\nActions:\nPostConditions:\n"));
        assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
        encode(&p.ast.preconditions[0].expr)
    }

    #[test]
    fn comparison() {
        assert_eq!(enc("uesr == \"root\""), ["==", "{uesr}", "root"]);
    }

    #[test]
    fn bare_variable_is_truthiness() {
        assert_eq!(enc("con"), ["truthy", "{con}"]);
        assert_eq!(enc("not con"), ["not", "truthy", "{con}"]);
        assert_eq!(enc("a and b.c"), ["and", "truthy", "{a}", "truthy", "{b.c}"]);
    }

    #[test]
    fn oracle_call() {
        assert_eq!(
            enc("Oracle.CAN_MESSAGE(MSG_SPD)"),
            ["oracle", "CAN_MESSAGE", "{MSG_SPD}"]
        );
    }

    #[test]
    fn literals_that_need_escaping() {
        assert_eq!(enc("x == \"and\""), ["==", "{x}", "\\and"]);
        assert_eq!(enc("x == \"5\""), ["==", "{x}", "\\5"]);
        assert_eq!(enc("x == \"{y}\""), ["==", "{x}", "\\{y}"]);
        assert_eq!(enc("x == 5"), ["==", "{x}", "5"]);
        assert_eq!(enc("x + 1 > 2"), [">", "+", "{x}", "1", "2"]);
    }

    #[test]
    fn decode_examples() {
        let t = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(
            decode(&t(&["==", "root", "root"])).unwrap(),
            Assertion::Binary(
                BinOp::Eq,
                Box::new(Assertion::Literal(Value::text("root"))),
                Box::new(Assertion::Literal(Value::text("root")))
            )
        );
        assert!(decode(&t(&["=="])).is_err());
        assert!(decode(&t(&["truthy", "{a}", "{b}"])).is_err());
        assert!(decode(&t(&[])).is_err());
        assert!(decode(&t(&["oracle", "NOPE", "x"])).is_err());
    }

    /// Decoding should recover the expression tree, modulo the explicit
    /// truthiness wrappers the encoder inserts.
    fn strip(a: Assertion) -> Assertion {
        match a {
            Assertion::Truthy(inner) => strip(*inner),
            Assertion::Not(inner) => Assertion::Not(Box::new(strip(*inner))),
            Assertion::Binary(op, l, r) => {
                Assertion::Binary(op, Box::new(strip(*l)), Box::new(strip(*r)))
            }
            Assertion::Oracle { name, args } => Assertion::Oracle {
                name,
                args: args.into_iter().map(strip).collect(),
            },
            other => other,
        }
    }

    fn expected(e: &Expr) -> Assertion {
        match e {
            Expr::Text(s) => Assertion::Literal(Value::Text(s.clone())),
            Expr::Int(n) => Assertion::Literal(Value::Integer(*n)),
            Expr::Bool(b) => Assertion::Literal(Value::Boolean(*b)),
            Expr::Path(lv) => Assertion::Var(lv.segments.clone()),
            Expr::Not(i) => Assertion::Not(Box::new(expected(i))),
            Expr::Binary(op, l, r) => {
                Assertion::Binary(*op, Box::new(expected(l)), Box::new(expected(r)))
            }
            Expr::Oracle { name, args } => Assertion::Oracle {
                name: name.clone(),
                args: args.iter().map(expected).collect(),
            },
        }
    }

    proptest! {
        #[test]
        fn encode_decode_recovers_tree(e in arbitrary::expr()) {
            let decoded = decode(&encode(&e)).unwrap();
            prop_assert_eq!(strip(decoded), expected(&e));
        }
    }
}
