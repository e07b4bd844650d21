use criterion::{black_box, criterion_group, criterion_main, Criterion};

use alia_core::executor::{execute, ExecOptions};
use alia_core::sim::{SimConfig, SimRegistry};
use alia_core::{check, compile, load_profile, parse, pretty_print, ToolMapping};

const BT_CAN_DOS: &str = include_str!("../../../corpus/scripts/bt-can-dos.alia");
const PROFILE: &str = include_str!("../../../corpus/profiles/mazda3-2012.sut.json");
const SIM: &str = include_str!("../../../corpus/sim/mazda3-2012.sim.json");

fn pipeline(c: &mut Criterion) {
    let mapping = ToolMapping::builtin();
    let profile = load_profile(PROFILE).unwrap();
    let sim = SimConfig::load(SIM).unwrap();
    let ast = parse(BT_CAN_DOS).ast;
    let script = compile(&ast, &mapping).unwrap();

    c.bench_function("parse", |b| b.iter(|| parse(black_box(BT_CAN_DOS))));
    c.bench_function("pretty_print", |b| b.iter(|| pretty_print(black_box(&ast))));
    c.bench_function("check", |b| b.iter(|| check(black_box(&ast), Some(&profile))));
    c.bench_function("compile", |b| b.iter(|| compile(black_box(&ast), &mapping).unwrap()));
    c.bench_function("execute_simulated", |b| {
        b.iter(|| {
            let mut reg = SimRegistry::simulated(sim.clone()).unwrap();
            execute(black_box(&script), &profile, &mut reg, ExecOptions::default()).unwrap()
        })
    });
    c.bench_function("end_to_end", |b| {
        b.iter(|| {
            let ast = parse(black_box(BT_CAN_DOS)).ast;
            let script = compile(&ast, &mapping).unwrap();
            let mut reg = SimRegistry::simulated(sim.clone()).unwrap();
            execute(&script, &profile, &mut reg, ExecOptions::default()).unwrap()
        })
    });
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
