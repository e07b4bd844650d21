//! Evaluation of `assert` / `if` / `while` condition parameters.

use crate::ast::BinOp;
use crate::compiler::condition::{decode, Assertion};
use crate::kb::SutProfile;
use crate::value::Value;

use super::{AdapterRegistry, RunState};

/// Decode and evaluate a prefix-serialized condition.
///
/// `Err` carries the failure message: `bad-assertion: ...`,
/// `unresolved-variable:<name>`, or an oracle/operand error.
pub fn evaluate_assert(
    parameters: &[String],
    state: &RunState,
    profile: &SutProfile,
    registry: &mut dyn AdapterRegistry,
) -> Result<bool, String> {
    let tree = decode(parameters).map_err(|e| e.to_string())?;
    let mut ev = Evaluator {
        state,
        profile,
        registry,
    };
    Ok(ev.eval(&tree)?.is_truthy())
}

struct Evaluator<'a> {
    state: &'a RunState,
    profile: &'a SutProfile,
    registry: &'a mut dyn AdapterRegistry,
}

impl Evaluator<'_> {
    fn eval(&mut self, a: &Assertion) -> Result<Value, String> {
        Ok(match a {
            Assertion::Literal(v) => v.clone(),
            Assertion::Var(path) => self
                .state
                .lookup(self.profile, path)
                .ok_or_else(|| format!("unresolved-variable:{}", path[0]))?,
            Assertion::Truthy(inner) => Value::Boolean(self.eval(inner)?.is_truthy()),
            Assertion::Not(inner) => Value::Boolean(!self.eval(inner)?.is_truthy()),
            Assertion::Binary(BinOp::And, l, r) => {
                Value::Boolean(self.eval(l)?.is_truthy() && self.eval(r)?.is_truthy())
            }
            Assertion::Binary(BinOp::Or, l, r) => {
                Value::Boolean(self.eval(l)?.is_truthy() || self.eval(r)?.is_truthy())
            }
            Assertion::Binary(op, l, r) => {
                let (l, r) = (self.eval(l)?, self.eval(r)?);
                binary(*op, &l, &r)?
            }
            Assertion::Oracle { name, args } => {
                let values = args
                    .iter()
                    .map(|a| self.eval(a))
                    .collect::<Result<Vec<_>, _>>()?;
                Value::Boolean(self.registry.oracle(name, &values)?)
            }
        })
    }
}

fn binary(op: BinOp, l: &Value, r: &Value) -> Result<Value, String> {
    use std::cmp::Ordering::*;
    let ord = l.compare(r);
    Ok(match op {
        BinOp::Eq => Value::Boolean(l.loosely_equals(r)),
        BinOp::Ne => Value::Boolean(!l.loosely_equals(r)),
        BinOp::Lt => Value::Boolean(ord == Some(Less)),
        BinOp::Le => Value::Boolean(matches!(ord, Some(Less | Equal))),
        BinOp::Gt => Value::Boolean(ord == Some(Greater)),
        BinOp::Ge => Value::Boolean(matches!(ord, Some(Greater | Equal))),
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
            let (a, b) = (as_int(l, op)?, as_int(r, op)?);
            let v = match op {
                BinOp::Add => a.checked_add(b),
                BinOp::Sub => a.checked_sub(b),
                BinOp::Mul => a.checked_mul(b),
                _ => a.checked_div(b),
            };
            Value::Integer(v.ok_or_else(|| format!("arithmetic-error: {a} {} {b}", op.symbol()))?)
        }
        BinOp::And | BinOp::Or => unreachable!("handled with short-circuiting"),
    })
}

fn as_int(v: &Value, op: BinOp) -> Result<i64, String> {
    match v {
        Value::Integer(n) => Ok(*n),
        Value::Text(s) => s
            .trim()
            .parse()
            .map_err(|_| format!("type-error: `{}` needs integers, got {s:?}", op.symbol())),
        other => Err(format!(
            "type-error: `{}` needs integers, got {}",
            op.symbol(),
            other.type_name()
        )),
    }
}
