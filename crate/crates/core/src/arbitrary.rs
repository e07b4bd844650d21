//! Proptest generators for syntax trees and compiled scripts.

use proptest::prelude::*;

use crate::ast::{
    is_reserved, oracle_arity, ArgValue, Argument, AttackDescription, AttackStep, BinOp, CallKind,
    CommandCall, Condition, Expr, LValue, Span, StepBody,
};
use crate::compiler::{CompiledCommand, CompiledScript, Phase};

pub fn identifier() -> impl Strategy<Value = String> {
    "[a-zA-Z_][a-zA-Z0-9_]{0,7}".prop_filter("reserved word", |s| !is_reserved(s))
}

pub fn lvalue() -> impl Strategy<Value = LValue> {
    prop::collection::vec(identifier(), 1..4).prop_map(|segments| LValue {
        segments,
        span: Span::default(),
    })
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[ -~]{0,10}",
        Just(String::new()),
        "[a-z]{1,4}\"[a-z]{0,3}",
        "[a-z]{0,3}\\\\n\t[a-z]{0,3}",
        Just("ünïcødé".to_string()),
    ]
}

pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        text().prop_map(Expr::Text),
        any::<i64>().prop_map(Expr::Int),
        any::<bool>().prop_map(Expr::Bool),
        lvalue().prop_map(Expr::Path),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            (prop::sample::select(BinOp::ALL.to_vec()), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            inner.prop_map(|arg| {
                debug_assert_eq!(oracle_arity("CAN_MESSAGE"), Some(1));
                Expr::Oracle {
                    name: "CAN_MESSAGE".into(),
                    args: vec![arg],
                }
            }),
        ]
    })
}

fn arg_value() -> impl Strategy<Value = ArgValue> {
    prop_oneof![
        text().prop_map(ArgValue::Text),
        any::<i64>().prop_map(ArgValue::Int),
        lvalue().prop_map(ArgValue::Var),
    ]
}

pub fn command_call() -> impl Strategy<Value = CommandCall> {
    (
        prop_oneof![Just(CallKind::Scan), Just(CallKind::Exploit)],
        identifier(),
        prop::collection::btree_map(identifier().prop_filter("type", |s| s != "type"), arg_value(), 0..4),
    )
        .prop_map(|(kind, func_type, args)| CommandCall {
            kind,
            func_type,
            args: args
                .into_iter()
                .map(|(name, value)| Argument {
                    name,
                    value,
                    span: Span::default(),
                })
                .collect(),
        })
}

fn call_step() -> impl Strategy<Value = AttackStep> {
    (identifier(), prop::option::of(lvalue()), command_call()).prop_map(|(label, assign, call)| {
        AttackStep {
            label,
            assign,
            body: StepBody::Call(call),
            span: Span::default(),
        }
    })
}

pub fn attack_step() -> impl Strategy<Value = AttackStep> {
    call_step().prop_recursive(2, 12, 3, |inner| {
        let block = prop::collection::vec(inner, 0..3);
        prop_oneof![
            (identifier(), expr(), block.clone(), prop::option::of(block.clone())).prop_map(
                |(label, cond, then_branch, else_branch)| AttackStep {
                    label,
                    assign: None,
                    body: StepBody::If {
                        cond,
                        then_branch,
                        else_branch,
                    },
                    span: Span::default(),
                }
            ),
            (identifier(), expr(), block).prop_map(|(label, cond, body)| AttackStep {
                label,
                assign: None,
                body: StepBody::While { cond, body },
                span: Span::default(),
            }),
        ]
    })
}

fn condition() -> impl Strategy<Value = Condition> {
    (identifier(), expr()).prop_map(|(label, expr)| Condition {
        label,
        expr,
        span: Span::default(),
    })
}

/// Syntactically valid descriptions. Labels are not made unique; the
/// generator targets the grammar, not the checker.
pub fn attack_description() -> impl Strategy<Value = AttackDescription> {
    (
        prop::collection::vec(condition(), 0..4),
        prop::collection::vec(attack_step(), 0..6),
        prop::collection::vec(condition(), 0..4),
    )
        .prop_map(|(preconditions, actions, postconditions)| AttackDescription {
            preconditions,
            actions,
            postconditions,
        })
}

fn parameter() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z0-9 .-]{0,8}",
        identifier().prop_map(|v| format!("{{{v}}}")),
        Just("{{literal}}".to_string()),
    ]
}

fn assert_parameters() -> impl Strategy<Value = Vec<String>> {
    prop_oneof![
        identifier().prop_map(|v| vec!["truthy".into(), format!("{{{v}}}")]),
        (identifier(), "[a-z]{0,5}")
            .prop_map(|(v, lit)| vec!["==".into(), format!("{{{v}}}"), lit]),
        prop::collection::vec("[a-z=<>{}]{0,4}", 0..4),
    ]
}

fn flat_command() -> impl Strategy<Value = CompiledCommand> {
    let tool_cmd = (
        prop::sample::select(vec!["bash", "adb", "bbshell", "nowhere"]),
        identifier(),
        prop::collection::vec(parameter(), 0..4),
    )
        .prop_map(|(env, tool, parameters)| (env.to_string(), tool, parameters));
    let assert_cmd = assert_parameters().prop_map(|p| ("axe".to_string(), "assert".to_string(), p));
    (
        prop_oneof![3 => tool_cmd, 1 => assert_cmd],
        prop::option::of(prop::sample::select(vec!["a", "b", "c", "d"])),
        prop::sample::select(vec![Phase::Pre, Phase::Attack, Phase::Post]),
        prop::option::of(lvalue()),
        prop::option::of(1u64..5_000),
    )
        .prop_map(|((environment, tool, parameters), label, phase, assign, timeout_ms)| {
            CompiledCommand {
                environment,
                tool,
                parameters,
                label: label.map(str::to_string),
                phase: Some(phase),
                assign: assign.map(|lv| lv.dotted()),
                body: None,
                else_body: None,
                timeout_ms,
            }
        })
}

/// Schema-valid scripts without control flow; every command yields exactly
/// one report entry.
pub fn flat_script() -> impl Strategy<Value = CompiledScript> {
    prop::collection::vec(flat_command(), 0..24).prop_map(|execute| CompiledScript { execute })
}

/// Schema-valid scripts that may nest `if`/`while` groups.
pub fn nested_script() -> impl Strategy<Value = CompiledScript> {
    let cmd = flat_command().prop_recursive(2, 24, 4, |inner| {
        (
            prop::bool::ANY,
            assert_parameters(),
            prop::collection::vec(inner.clone(), 0..4),
            prop::option::of(prop::collection::vec(inner, 0..3)),
        )
            .prop_map(|(is_if, parameters, body, else_body)| CompiledCommand {
                environment: "axe".into(),
                tool: if is_if { "if" } else { "while" }.into(),
                parameters,
                label: None,
                phase: Some(Phase::Attack),
                assign: None,
                body: Some(body),
                else_body: if is_if { else_body } else { None },
                timeout_ms: None,
            })
    });
    prop::collection::vec(cmd, 0..12).prop_map(|execute| CompiledScript { execute })
}
