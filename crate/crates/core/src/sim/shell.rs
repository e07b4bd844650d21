//! Privilege-aware shell stand-in for host and target sessions.

use std::sync::{Arc, Mutex};

use crate::clock::Clock;
use crate::executor::{AdapterOutput, Invocation, Session};
use crate::frame::CanFrame;
use crate::value::Value;

use super::World;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShellKind {
    /// The tester's machine: debug bridge, Bluetooth tooling.
    Host,
    /// A shell on the vehicle's head unit.
    Target,
}

pub struct SimShell {
    name: String,
    kind: ShellKind,
    root: bool,
    world: Arc<Mutex<World>>,
    clock: Arc<dyn Clock>,
}

impl SimShell {
    pub fn new(
        name: impl Into<String>,
        kind: ShellKind,
        world: Arc<Mutex<World>>,
        clock: Arc<dyn Clock>,
    ) -> Self {
        SimShell {
            name: name.into(),
            kind,
            root: false,
            world,
            clock,
        }
    }

    /// Run one command; the `(status, output)` part of the result is fully
    /// determined by the command, the shell state and the world.
    pub fn exec(&mut self, tool: &str, params: &[String]) -> AdapterOutput {
        let mut world = self.world.lock().expect("world lock");
        let latency = world.config.command_latency_ms;
        world.record(&self.name, tool, params);
        drop(world);
        self.clock.sleep_ms(latency);
        let mut world = self.world.lock().expect("world lock");
        let now = self.clock.now_ms();
        world.flush(now);
        if let Some(o) = world.config.overrides.get(tool) {
            return AdapterOutput::failed(o.status, o.output.clone());
        }
        let arg = |i: usize| params.get(i).map(String::as_str).unwrap_or("");
        let host = self.kind == ShellKind::Host;
        match (tool, host) {
            ("whoami", _) => AdapterOutput::ok(if self.root { "root" } else { "shell" }),
            ("su", _) => {
                self.root = true;
                AdapterOutput::ok("")
            }
            ("echo", _) => AdapterOutput::ok(params.join(" ")),
            ("ls", true) => AdapterOutput::ok("payloads"),
            ("ls", false) => AdapterOutput::ok("data\nsdcard\nsystem"),
            ("true", _) => AdapterOutput::ok(""),
            ("false", _) => AdapterOutput::failed(1, ""),
            ("incr", _) if !arg(0).is_empty() => {
                let n = world.counters.entry(arg(0).to_string()).or_insert(0);
                *n += 1;
                AdapterOutput::value(Value::Integer(*n))
            }
            ("sleep", _) => match arg(0).parse::<u64>() {
                Ok(ms) => {
                    drop(world);
                    self.clock.sleep_ms(ms);
                    AdapterOutput::ok("")
                }
                Err(_) => AdapterOutput::failed(2, format!("sleep: bad duration {:?}", arg(0))),
            },
            ("exit", false) => AdapterOutput {
                close: true,
                ..AdapterOutput::ok("")
            },
            ("exit", true) => AdapterOutput::failed(1, "exit: refusing to close the host shell"),
            ("adb", true) if arg(0) == "connect" && !arg(1).is_empty() => AdapterOutput {
                status: 0,
                output: format!("connected to {}", adb_address(arg(1))),
                value: Some(Value::text("adb")),
                spawn: Some("adb".into()),
                ..Default::default()
            },
            ("blueborne-scan", true) => {
                let bt = &world.config.bluetooth;
                if arg(0) == bt.interface {
                    AdapterOutput::value(Value::structured([("addr", Value::text(&bt.mac))]))
                } else {
                    AdapterOutput::failed(1, format!("no-such-interface: {:?}", arg(0)))
                }
            }
            ("blueborne", true) => {
                if arg(0) == world.config.bluetooth.mac {
                    AdapterOutput {
                        status: 0,
                        output: "bbshell".into(),
                        value: Some(Value::text("bbshell")),
                        spawn: Some("bbshell".into()),
                        ..Default::default()
                    }
                } else {
                    AdapterOutput::failed(1, format!("no-such-device: {:?}", arg(0)))
                }
            }
            ("hotspot", false) if arg(0) == "start" => {
                world.hotspot_up = true;
                let ip = world.config.hotspot_ip.clone();
                let mut out = AdapterOutput::value(Value::text(ip));
                out.observations.insert("WIFI".into(), Value::text("Android"));
                out
            }
            ("pkg", false) if arg(0) == "install" && !arg(1).is_empty() => {
                world.installed.insert(arg(1).to_string());
                AdapterOutput::ok(format!("installed {}", arg(1)))
            }
            ("pip", false) if arg(0) == "install" && !arg(1).is_empty() => {
                if !world.installed.contains("python") {
                    return AdapterOutput::failed(127, "pip: command not found");
                }
                world.installed.insert(arg(1).to_string());
                AdapterOutput::ok(format!("Successfully installed {}", arg(1)))
            }
            ("install-script", false) if !arg(0).is_empty() => {
                world.installed.insert(arg(0).to_string());
                AdapterOutput::value(Value::text(format!("/sdcard/{}.py", arg(0))))
            }
            ("python", false) => {
                if !world.installed.contains("python") {
                    return AdapterOutput::failed(127, "python: command not found");
                }
                let Some(script) = world.config.scripts.get(arg(0)).cloned() else {
                    return AdapterOutput::failed(2, format!("python: can't open file {:?}", arg(0)));
                };
                if !world.installed.contains("python-can") {
                    return AdapterOutput::failed(1, "ModuleNotFoundError: No module named 'can'");
                }
                if let Some(req) = &script.requires {
                    if !world.installed.contains(req) {
                        return AdapterOutput::failed(1, format!("{req}: payload not installed"));
                    }
                }
                world.bus_send(now, script.frame.frame(), script.period_ms, script.count);
                AdapterOutput::ok(format!("sending {}", script.frame))
            }
            ("cansend", _) => {
                let frame = match arg(0).parse::<CanFrame>() {
                    Ok(f) => f,
                    Err(e) => return AdapterOutput::failed(1, e.to_string()),
                };
                let mut period = None;
                let mut count = None;
                for p in &params[1..] {
                    let parsed = if let Some(v) = p.strip_prefix("--period=") {
                        v.parse().map(|v| period = Some(v))
                    } else if let Some(v) = p.strip_prefix("--count=") {
                        v.parse().map(|v| count = Some(v))
                    } else {
                        return AdapterOutput::failed(2, format!("cansend: unknown option {p:?}"));
                    };
                    if parsed.is_err() {
                        return AdapterOutput::failed(2, format!("cansend: bad option {p:?}"));
                    }
                }
                world.bus_send(now, frame, period, count);
                AdapterOutput::ok("")
            }
            _ => AdapterOutput::failed(127, format!("{tool}: command not found")),
        }
    }
}

/// `adb connect` accepts a bare address or a scanned target with an `ip`.
fn adb_address(target: &str) -> String {
    serde_json::from_str::<serde_json::Value>(target)
        .ok()
        .and_then(|v| v.get("ip").and_then(|ip| ip.as_str()).map(str::to_string))
        .unwrap_or_else(|| target.to_string())
}

impl Session for SimShell {
    fn dispatch(&mut self, inv: &Invocation<'_>) -> Result<AdapterOutput, String> {
        Ok(self.exec(inv.tool, inv.parameters))
    }
}
