//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use proptest::test_runner::{Config, TestRunner};
use tower::ServiceExt;

use alia_cli::server::{router, AppState};
use alia_core::arbitrary;
use alia_core::diagnostic::Severity;
use alia_core::executor::{execute, ExecOptions};
use alia_core::sim::{AlwaysFailRegistry, SimConfig, SimRegistry};
use alia_core::{
    check, compile, load_profile, parse, pretty_print, CompiledScript, ExecutionReport, Phase,
    Status, SutProfile, ToolMapping,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(corpus().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn profile(rel: &str) -> SutProfile {
    load_profile(&read(rel)).unwrap()
}

fn sim(rel: &str) -> SimConfig {
    SimConfig::load(&read(rel)).unwrap()
}

fn compiled(rel: &str) -> Result<CompiledScript, String> {
    let parsed = parse(&read(rel));
    if parsed.has_errors() {
        return Err(format!("{rel} has parse errors: {:?}", parsed.diagnostics));
    }
    compile(&parsed.ast, &ToolMapping::builtin()).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_sim(script: &CompiledScript, p: &SutProfile, cfg: SimConfig) -> (ExecutionReport, SimRegistry) {
    let mut reg = SimRegistry::simulated(cfg).unwrap();
    let report = execute(script, p, &mut reg, ExecOptions::default()).unwrap();
    (report, reg)
}

fn skip_chain_semantics() -> Outcome {
    use Status::*;
    let start = Instant::now();
    let script = compiled("scripts/skip-chain.alia")?;
    let (report, _) = run_sim(&script, &profile("profiles/skip-chain.sut.json"), sim("sim/default.sim.json"));
    let elapsed = start.elapsed();
    let expected = [Ok, Failed, Failed, Ok, Ok, Failed, Failed, Skipped, Skipped, Ok, Ok, Ok];
    ensure(report.statuses() == expected, || {
        format!("status sequence {:?}", report.statuses())
    })?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Result::Ok(format!("12 statuses match in {elapsed:?}"))
}

fn adb_root_diagnostics() -> Outcome {
    let parsed = parse(&read("scripts/adb-root.alia"));
    let empty = profile("profiles/empty.sut.json");
    ensure(!empty.contains("ip_addr"), || "profile has ip_addr".into())?;
    let mut diags = parsed.diagnostics.clone();
    diags.extend(check(&parsed.ast, Some(&empty)));
    let summary: Vec<(Severity, &str, usize, bool)> = diags
        .iter()
        .map(|d| {
            let subject = match d.code {
                "undefined-variable" => "`uesr`",
                _ => "`ip_addr`",
            };
            (d.severity, d.code, d.span.line, d.message.contains(subject))
        })
        .collect();
    let mut sorted = summary.clone();
    sorted.sort_by_key(|s| s.2);
    let expected = vec![
        (Severity::Warning, "unknown-system-variable", 4, true),
        (Severity::Error, "undefined-variable", 9, true),
    ];
    ensure(sorted == expected, || format!("got {summary:?}"))?;
    Ok("uesr error on line 9, ip_addr warning on line 4, nothing else".into())
}

fn output_format() -> Outcome {
    let script = compiled("scripts/adb-root.alia")?;
    let first = script
        .execute
        .iter()
        .find(|c| c.phase == Some(Phase::Attack))
        .ok_or("no attack command")?;
    let mut value = serde_json::to_value(first).map_err(|e| e.to_string())?;
    let obj = value.as_object_mut().unwrap();
    obj.retain(|k, _| matches!(k.as_str(), "environment" | "tool" | "parameters"));
    let expected: serde_json::Value = serde_json::from_str(
        r#"{"environment":"bash","tool":"adb","parameters":["connect","{ip_addr}"]}"#,
    )
    .unwrap();
    ensure(value == expected, || format!("first attack {value}"))?;
    let empty = compiled("scripts/empty.alia")?.to_json();
    ensure(empty == r#"{"execute":[]}"#, || format!("empty compiles to {empty}"))?;
    Ok("first attack matches; empty input gives {\"execute\":[]}".into())
}

const MAZDA_FRAME: &str = "201#32C800006464C800";
const B_FRAME: &str = "200#CAFE123456";

fn bt_can_dos_run(profile_rel: &str, sim_rel: &str) -> Result<(ExecutionReport, SimRegistry), String> {
    let script = compiled("scripts/bt-can-dos.alia")?;
    Ok(run_sim(&script, &profile(profile_rel), sim(sim_rel)))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let (report, reg) = bt_can_dos_run("profiles/mazda3-2012.sut.json", "sim/mazda3-2012.sim.json")?;
    let (again, _) = bt_can_dos_run("profiles/mazda3-2012.sut.json", "sim/mazda3-2012.sim.json")?;
    let elapsed = start.elapsed();
    let last = report.entries.last().ok_or("empty report")?;
    ensure(
        last.label.as_deref() == Some("can_attack")
            && last.phase == Some(Phase::Post)
            && last.status == Status::Ok,
        || format!("last entry {last:?}"),
    )?;
    ensure(reg.needle_deflected(), || "needle not deflected".into())?;
    let frames: Vec<String> = reg.bus_log().iter().map(|(_, f)| f.to_string()).collect();
    ensure(frames.iter().any(|f| f == MAZDA_FRAME), || format!("bus log {frames:?}"))?;
    ensure(report.to_json() == again.to_json(), || "reports differ between runs".into())?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} entries, oracle OK, needle deflected, deterministic, {elapsed:?} for two runs",
        report.entries.len()
    ))
}

fn agnosticism() -> Outcome {
    let (a, reg_a) = bt_can_dos_run("profiles/mazda3-2012.sut.json", "sim/mazda3-2012.sim.json")?;
    let (b, reg_b) = bt_can_dos_run("profiles/vehicle-b.sut.json", "sim/vehicle-b.sim.json")?;
    ensure(a.statuses() == b.statuses(), || {
        format!("{:?} vs {:?}", a.statuses(), b.statuses())
    })?;
    let frames = |r: &SimRegistry| -> Vec<String> { r.bus_log().iter().map(|(_, f)| f.to_string()).collect() };
    let (fa, fb) = (frames(&reg_a), frames(&reg_b));
    ensure(fb.iter().any(|f| f == B_FRAME), || format!("profile B bus log {fb:?}"))?;
    ensure(!fb.iter().any(|f| f == MAZDA_FRAME), || "profile B bus has the mazda frame".into())?;
    ensure(!fa.iter().any(|f| f == B_FRAME), || "mazda bus has the profile B frame".into())?;
    ensure(reg_b.needle_deflected(), || "profile B needle not deflected".into())?;
    Ok(format!("same {} statuses, bus carries {B_FRAME}", b.entries.len()))
}

fn round_trip() -> Outcome {
    let cases = Cell::new(0u32);
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&arbitrary::attack_description(), |ast| {
            cases.set(cases.get() + 1);
            let text = pretty_print(&ast);
            let parsed = parse(&text);
            proptest::prop_assert!(parsed.diagnostics.is_empty(), "{:?}\n{text}", parsed.diagnostics);
            proptest::prop_assert_eq!(parsed.ast.strip_spans(), ast);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    ensure(cases.get() >= 1000, || format!("only {} cases", cases.get()))?;
    Ok(format!("{} generated trees round-trip", cases.get()))
}

fn no_abort() -> Outcome {
    let cases = Cell::new(0u32);
    let commands = Cell::new(0usize);
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let empty = SutProfile::new("empty");
    runner
        .run(&arbitrary::flat_script(), |script| {
            cases.set(cases.get() + 1);
            commands.set(commands.get() + script.execute.len());
            let mut reg = AlwaysFailRegistry::new();
            let report = execute(&script, &empty, &mut reg, ExecOptions::default())
                .map_err(|e| proptest::test_runner::TestCaseError::fail(e.to_string()))?;
            proptest::prop_assert_eq!(report.entries.len(), script.execute.len());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    ensure(cases.get() >= 1000, || format!("only {} cases", cases.get()))?;
    Ok(format!(
        "{} scripts, {} commands, every report complete",
        cases.get(),
        commands.get()
    ))
}

fn http_parity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let script_path = dir.path().join("bt-can-dos.json");
    let report_path = dir.path().join("report.json");
    let script = compiled("scripts/bt-can-dos.alia")?;
    std::fs::write(&script_path, script.to_json()).map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_alia"))
        .arg("run")
        .arg(&script_path)
        .arg("--profile")
        .arg(corpus().join("profiles/mazda3-2012.sut.json"))
        .arg("--sim")
        .arg(corpus().join("sim/mazda3-2012.sim.json"))
        .arg("--report")
        .arg(&report_path)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("cli run exited with {status}"))?;
    let cli_bytes = std::fs::read(&report_path).map_err(|e| e.to_string())?;

    let mut profiles = BTreeMap::new();
    let p = profile("profiles/mazda3-2012.sut.json");
    profiles.insert(p.id.clone(), p);
    let app = router(AppState::new(profiles, sim("sim/mazda3-2012.sim.json"), 4));
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let post = |body: serde_json::Value| {
        let app = app.clone();
        rt.block_on(async move {
            let resp = app
                .oneshot(
                    Request::post("/execute")
                        .header("content-type", "application/json")
                        .body(Body::from(body.to_string()))
                        .unwrap(),
                )
                .await
                .unwrap();
            let status = resp.status();
            let bytes = resp.into_body().collect().await.unwrap().to_bytes();
            (status, bytes.to_vec())
        })
    };
    let script_value = serde_json::to_value(&script).unwrap();
    let (status, http_bytes) =
        post(serde_json::json!({"script": script_value, "profile_id": "mazda3-2012"}));
    ensure(status == StatusCode::OK, || format!("POST /execute returned {status}"))?;
    ensure(http_bytes == cli_bytes, || {
        format!(
            "bodies differ:\nhttp {}\ncli  {}",
            String::from_utf8_lossy(&http_bytes),
            String::from_utf8_lossy(&cli_bytes)
        )
    })?;
    let (status, body) = post(serde_json::json!({"script": script_value, "profile_id": "nope"}));
    ensure(status == StatusCode::BAD_REQUEST, || format!("unknown profile gave {status}"))?;
    let err: serde_json::Value = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
    ensure(err["error"] == "unknown-profile", || format!("error body {err}"))?;
    Ok(format!("{} identical bytes; unknown profile -> 400", cli_bytes.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 skip-chain-semantics", skip_chain_semantics),
        ("2 adb-root-diagnostics", adb_root_diagnostics),
        ("3 output-format", output_format),
        ("4 end-to-end", end_to_end),
        ("5 agnosticism", agnosticism),
        ("6 round-trip", round_trip),
        ("7 no-abort", no_abort),
        ("8 http-parity", http_parity),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
