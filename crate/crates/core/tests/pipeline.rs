use std::path::PathBuf;

use alia_core::executor::{execute, ExecOptions};
use alia_core::sim::{SimConfig, SimRegistry};
use alia_core::{
    check, compile, load_profile, parse, pretty_print, CompiledScript, Phase, Status, SutProfile,
    ToolMapping,
};

fn read(rel: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn profile(name: &str) -> SutProfile {
    load_profile(&read(&format!("profiles/{name}.sut.json"))).unwrap()
}

fn compiled(name: &str) -> CompiledScript {
    let parsed = parse(&read(&format!("scripts/{name}.alia")));
    assert!(!parsed.has_errors(), "{:?}", parsed.diagnostics);
    compile(&parsed.ast, &ToolMapping::builtin()).unwrap()
}

#[test]
fn bt_can_dos_is_clean_against_its_profile() {
    let parsed = parse(&read("scripts/bt-can-dos.alia"));
    let diags = check(&parsed.ast, Some(&profile("mazda3-2012")));
    assert!(diags.is_empty(), "{diags:?}");
}

#[test]
fn bt_can_dos_attacks_the_cluster() {
    let script = compiled("bt-can-dos");
    let sim = SimConfig::load(&read("sim/mazda3-2012.sim.json")).unwrap();
    let mut reg = SimRegistry::simulated(sim).unwrap();
    let report = execute(&script, &profile("mazda3-2012"), &mut reg, ExecOptions::default()).unwrap();
    assert!(report.statuses().iter().all(|s| *s == Status::Ok), "{}", report.to_table());
    let last = report.entries.last().unwrap();
    assert_eq!(last.label.as_deref(), Some("can_attack"));
    assert_eq!(last.phase, Some(Phase::Post));
    assert!(reg.needle_deflected());
}

#[test]
fn compiled_json_round_trips() {
    for name in ["adb-root", "bt-can-dos", "skip-chain", "counter", "empty"] {
        let script = compiled(name);
        assert_eq!(CompiledScript::from_json(&script.to_json()).unwrap(), script);
        assert_eq!(CompiledScript::from_json(&script.to_json_pretty()).unwrap(), script);
    }
}

#[test]
fn corpus_scripts_round_trip_through_printer() {
    for name in ["adb-root", "bt-can-dos", "skip-chain", "counter", "empty"] {
        let ast = parse(&read(&format!("scripts/{name}.alia"))).ast.strip_spans();
        let again = parse(&pretty_print(&ast));
        assert!(again.diagnostics.is_empty(), "{name}: {:?}", again.diagnostics);
        assert_eq!(again.ast.strip_spans(), ast, "{name}");
    }
}

#[test]
fn runs_are_isolated() {
    let script = compiled("counter");
    let p = profile("skip-chain");
    let first = {
        let mut reg = SimRegistry::simulated(SimConfig::default()).unwrap();
        execute(&script, &p, &mut reg, ExecOptions::default()).unwrap()
    };
    let mut reg = SimRegistry::simulated(SimConfig::default()).unwrap();
    let second = execute(&script, &p, &mut reg, ExecOptions::default()).unwrap();
    assert_eq!(first.to_json(), second.to_json());
}
