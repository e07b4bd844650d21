use proptest::prelude::*;

use super::*;
use crate::arbitrary;

const ADB_ROOT: &str = include_str!("../../../../corpus/scripts/adb-root.alia");
const BT_CAN_DOS: &str = include_str!("../../../../corpus/scripts/bt-can-dos.alia");

fn codes(p: &Parsed) -> Vec<&'static str> {
    p.diagnostics.iter().map(|d| d.code).collect()
}

#[test]
fn adb_root_shape() {
    let p = parse(ADB_ROOT);
    assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
    assert_eq!(p.ast.preconditions.len(), 1);
    assert_eq!(p.ast.actions.len(), 4);
    assert_eq!(p.ast.postconditions.len(), 1);
    let labels: Vec<_> = p.ast.actions.iter().map(|a| a.label.as_str()).collect();
    assert_eq!(labels, ["get_con", "get_su_rights", "exe_whoami", "list"]);

    let first = &p.ast.actions[0];
    assert_eq!(first.assign.as_ref().unwrap().dotted(), "con");
    let StepBody::Call(call) = &first.body else {
        panic!("expected call")
    };
    assert_eq!(call.kind, CallKind::Exploit);
    assert_eq!(call.func_type, "OpenADB");
    assert_eq!(first.span.line, 4);
    let stripped = p.ast.strip_spans();
    let StepBody::Call(call) = &stripped.actions[0].body else {
        panic!("expected call")
    };
    assert_eq!(call.arg("target"), Some(&ArgValue::Var(LValue::new(["ip_addr"]))));

    assert_eq!(
        stripped.postconditions[0].expr,
        Expr::binary(BinOp::Eq, Expr::var("uesr"), Expr::Text("root".into()))
    );
    // single quotes and double quotes yield the same literal kind
    let StepBody::Call(su) = &p.ast.actions[1].body else {
        panic!()
    };
    assert_eq!(su.arg("command"), Some(&ArgValue::Text("su".into())));
}

#[test]
fn bt_can_dos_shape() {
    let p = parse(BT_CAN_DOS);
    assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
    assert_eq!(p.ast.preconditions.len(), 4);
    assert_eq!(p.ast.actions.len(), 8);
    assert_eq!(p.ast.postconditions.len(), 2);
    let hotspot = &p.ast.actions[2];
    assert_eq!(hotspot.assign.as_ref().unwrap().segments, ["mytarget", "ip"]);
    assert_eq!(
        p.ast.strip_spans().postconditions[1].expr,
        Expr::Oracle {
            name: "CAN_MESSAGE".into(),
            args: vec![Expr::var("MSG_SPD")]
        }
    );
}

#[test]
fn empty_program() {
    let p = parse("PreConditions:\nActions:\nPostConditions:\n");
    assert!(p.diagnostics.is_empty());
    assert_eq!(p.ast, AttackDescription::default());
}

#[test]
fn empty_ast_prints_three_headers() {
    assert_eq!(
        pretty_print(&AttackDescription::default()),
        "PreConditions:\nActions:\nPostConditions:\n"
    );
}

#[test]
fn canonical_argument_spacing() {
    let p = parse(ADB_ROOT);
    let text = pretty_print(&p.ast);
    assert!(text.contains("  get_con: con = exploit(type:OpenADB, target:ip_addr)\n"));
    assert!(text.contains("  exe_whoami: uesr == \"root\"\n"));
}

#[test]
fn corpus_round_trips() {
    for src in [ADB_ROOT, BT_CAN_DOS] {
        let first = parse(src);
        let printed = pretty_print(&first.ast);
        let second = parse(&printed);
        assert!(second.diagnostics.is_empty(), "{printed}\n{:?}", second.diagnostics);
        assert_eq!(first.ast.strip_spans(), second.ast.strip_spans());
        // printing is a fixed point after one pass
        assert_eq!(pretty_print(&second.ast), printed);
    }
}

#[test]
fn crlf_accepted() {
    let p = parse(&ADB_ROOT.replace('\n', "\r\n"));
    assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
    assert_eq!(p.ast.strip_spans(), parse(ADB_ROOT).ast.strip_spans());
}

#[test]
fn comments_ignored() {
    let src = "// header\nPreConditions: // trailing\nActions:\n  a: exploit(type:X) // c\nPostConditions:\n";
    let p = parse(src);
    assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
    assert_eq!(p.ast.actions.len(), 1);
}

#[test]
fn unbalanced_parenthesis_drops_line_and_continues() {
    let src = "PreConditions:\nActions:\n  a: exploit(type:X, x:'1'\n  b: exploit(type:Y)\nPostConditions:\n  b: (x == 1\n  a: y\n";
    let p = parse(src);
    assert_eq!(codes(&p), ["unbalanced-parentheses", "unbalanced-parentheses"]);
    assert_eq!(p.diagnostics[0].span().line, 3);
    assert_eq!(p.diagnostics[1].span().line, 6);
    assert_eq!(p.ast.actions.len(), 1);
    assert_eq!(p.ast.actions[0].label, "b");
    assert_eq!(p.ast.postconditions.len(), 1);
}

#[test]
fn stray_closing_paren() {
    let p = parse("PreConditions:\n  a: x)\nActions:\nPostConditions:\n");
    assert_eq!(codes(&p), ["unbalanced-parentheses"]);
}

#[test]
fn missing_label() {
    let p = parse("PreConditions:\nActions:\n  exploit(type:X)\n  ok: exploit(type:Y)\nPostConditions:\n");
    assert_eq!(codes(&p), ["missing-label"]);
    assert_eq!(p.diagnostics[0].span(), Span::new(3, 3, 9));
    assert_eq!(p.ast.actions.len(), 1);
}

#[test]
fn missing_sections() {
    let p = parse("Actions:\n  a: exploit(type:X)\n");
    assert_eq!(codes(&p), ["missing-section", "missing-section"]);
    assert_eq!(p.ast.actions.len(), 1);

    let p = parse("");
    assert_eq!(codes(&p).len(), 3);
}

#[test]
fn sections_out_of_order() {
    let p = parse("PreConditions:\nPostConditions:\nActions:\n");
    assert!(codes(&p).contains(&"missing-section") || codes(&p).contains(&"section-order"));
    assert!(p.has_errors());
}

#[test]
fn missing_type_argument() {
    let p = parse("PreConditions:\nActions:\n  a: exploit(target:x)\nPostConditions:\n");
    assert_eq!(codes(&p), ["missing-type"]);
}

#[test]
fn duplicate_argument() {
    let p = parse("PreConditions:\nActions:\n  a: exploit(type:X, t:1, t:2)\nPostConditions:\n");
    assert_eq!(codes(&p), ["duplicate-argument"]);
}

#[test]
fn unknown_oracle_and_arity() {
    let p = parse("PreConditions:\n  a: Oracle.NOPE(x)\n  b: Oracle.CAN_MESSAGE(x, y)\nActions:\nPostConditions:\n");
    assert_eq!(codes(&p), ["unknown-oracle", "oracle-arity"]);
}

#[test]
fn reserved_words_rejected_as_names() {
    let p = parse("PreConditions:\n  while: x\nActions:\nPostConditions:\n");
    assert_eq!(codes(&p), ["reserved-word"]);
}

#[test]
fn precedence() {
    let p = parse("PreConditions:\n  a: not x == 1 + 2 * 3 or y and z\nActions:\nPostConditions:\n");
    assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
    let expected = Expr::binary(
        BinOp::Or,
        Expr::Not(Box::new(Expr::binary(
            BinOp::Eq,
            Expr::var("x"),
            Expr::binary(
                BinOp::Add,
                Expr::Int(1),
                Expr::binary(BinOp::Mul, Expr::Int(2), Expr::Int(3)),
            ),
        ))),
        Expr::binary(BinOp::And, Expr::var("y"), Expr::var("z")),
    );
    assert_eq!(p.ast.strip_spans().preconditions[0].expr, expected);
}

#[test]
fn left_associative_arithmetic() {
    let p = parse("PreConditions:\n  a: 10 - 3 - 2 == 5\nActions:\nPostConditions:\n");
    let expected = Expr::binary(
        BinOp::Eq,
        Expr::binary(
            BinOp::Sub,
            Expr::binary(BinOp::Sub, Expr::Int(10), Expr::Int(3)),
            Expr::Int(2),
        ),
        Expr::Int(5),
    );
    assert_eq!(p.ast.strip_spans().preconditions[0].expr, expected);
}

#[test]
fn negative_and_extreme_integers() {
    let p = parse("PreConditions:\n  a: x - -9223372036854775808 < 9223372036854775807\nActions:\nPostConditions:\n");
    assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
    let p = parse("PreConditions:\n  a: 9223372036854775808\nActions:\nPostConditions:\n");
    assert_eq!(codes(&p), ["invalid-token"]);
}

#[test]
fn control_flow_blocks() {
    let src = "\
PreConditions:
Actions:
  loop: while (n < 3) {
    bump: n = exploit(type:Count)
  }
  pick: if (n == 3) {
    yes: exploit(type:A)
  } else {
    no: exploit(type:B)
  }
  one: if (x) { inner: exploit(type:C) }
PostConditions:
";
    let p = parse(src);
    assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
    assert_eq!(p.ast.actions.len(), 3);
    let StepBody::If { else_branch, .. } = &p.ast.actions[1].body else {
        panic!()
    };
    assert_eq!(else_branch.as_ref().unwrap()[0].label, "no");
    assert_eq!(p.ast.all_steps().len(), 7);
}

#[test]
fn error_inside_block_keeps_block() {
    let src = "PreConditions:\nActions:\n  w: while (x) {\n    bad line here\n    ok: exploit(type:A)\n  }\n  after: exploit(type:B)\nPostConditions:\n";
    let p = parse(src);
    assert_eq!(codes(&p), ["missing-label"]);
    assert_eq!(p.ast.actions.len(), 2);
    let StepBody::While { body, .. } = &p.ast.actions[0].body else {
        panic!()
    };
    assert_eq!(body.len(), 1);
}

#[test]
fn unclosed_block() {
    let p = parse("PreConditions:\nActions:\n  w: while (x) {\n    ok: exploit(type:A)\nPostConditions:\n");
    assert!(codes(&p).contains(&"unbalanced-braces"));
}

#[test]
fn deterministic() {
    let src = "PreConditions:\n  a: (x\nActions:\n  b exploit\nPostConditions:\n  c: 'open";
    let a = parse(src);
    let b = parse(src);
    assert_eq!(a.diagnostics, b.diagnostics);
    assert_eq!(a.ast, b.ast);
}

fn source_bounds(src: &str) -> Vec<usize> {
    src.split('\n').map(|l| l.chars().count() + 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn generated_asts_round_trip(ast in arbitrary::attack_description()) {
        let printed = pretty_print(&ast);
        let parsed = parse(&printed);
        prop_assert!(parsed.diagnostics.is_empty(), "{}\n{:?}", printed, parsed.diagnostics);
        prop_assert_eq!(parsed.ast.strip_spans(), ast);
    }

    #[test]
    fn diagnostics_stay_in_bounds(src in "(PreConditions:|Actions:|PostConditions:|[a-z]{1,3}: |[(){}'\"=.,:]| |\n|exploit\\(type:X|-?[0-9]{1,3}){0,40}") {
        let bounds = source_bounds(&src);
        let parsed = parse(&src);
        for d in &parsed.diagnostics {
            let s = d.span();
            prop_assert!(s.line >= 1 && s.line <= bounds.len(), "{:?}", d);
            prop_assert!(s.column_start >= 1 && s.column_start <= s.column_end);
            prop_assert!(s.column_end <= bounds[s.line - 1], "{:?} in {:?}", d, src);
        }
    }
}
