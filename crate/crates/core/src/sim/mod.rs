//! Deterministic stand-in for a vehicle and the tester's host: shells, a
//! Bluetooth responder, a virtual CAN bus and an instrument cluster.

mod bus;
mod config;
mod shell;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

pub use bus::{InstrumentCluster, VirtualBus};
pub use config::{BluetoothConfig, CommandOverride, ScriptBehavior, SimConfig, SimConfigError};
pub use shell::{ShellKind, SimShell};

use crate::clock::{Clock, SimClock};
use crate::executor::{AdapterOutput, AdapterRegistry, Invocation, Session};
use crate::frame::{CanFrame, CanFrameText};
use crate::value::Value;

/// Observation names the simulator's adapters publish.
pub fn builtin_observations() -> BTreeSet<String> {
    ["WIFI"].into_iter().map(String::from).collect()
}

/// One command as received by a simulated session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispatchRecord {
    pub session: String,
    pub tool: String,
    pub parameters: Vec<String>,
}

/// Everything the simulated sessions share.
#[derive(Debug)]
pub struct World {
    pub config: SimConfig,
    pub bus: VirtualBus,
    pub cluster: InstrumentCluster,
    pub hotspot_up: bool,
    pub counters: BTreeMap<String, i64>,
    pub installed: BTreeSet<String>,
    pub dispatch_log: Vec<DispatchRecord>,
    /// Bus log entries already shown to the cluster.
    observed: usize,
}

impl World {
    pub fn new(config: SimConfig) -> Result<World, SimConfigError> {
        let cluster = InstrumentCluster::new(config.speed_can_id()?);
        Ok(World {
            config,
            bus: VirtualBus::new(),
            cluster,
            hotspot_up: false,
            counters: BTreeMap::new(),
            installed: BTreeSet::new(),
            dispatch_log: Vec::new(),
            observed: 0,
        })
    }

    fn record(&mut self, session: &str, tool: &str, params: &[String]) {
        self.dispatch_log.push(DispatchRecord {
            session: session.to_string(),
            tool: tool.to_string(),
            parameters: params.to_vec(),
        });
    }

    /// Advance cyclic senders to `now_ms` and let the cluster see new frames.
    pub fn flush(&mut self, now_ms: u64) {
        self.bus.flush(now_ms);
        for (_, frame) in &self.bus.log()[self.observed..] {
            self.cluster.observe(frame);
        }
        self.observed = self.bus.log().len();
    }

    pub fn bus_send(&mut self, now_ms: u64, frame: CanFrame, period_ms: Option<u64>, count: Option<u64>) {
        match period_ms {
            Some(p) => self.bus.send_cyclic(now_ms, frame, p, count),
            None => self.bus.send(now_ms, frame),
        }
        self.flush(now_ms);
    }
}

/// Registry backed by the simulator. The host shell is `bash`; spawned
/// sessions are target shells.
pub struct SimRegistry {
    world: Arc<Mutex<World>>,
    clock: Arc<dyn Clock>,
}

impl SimRegistry {
    pub fn new(config: SimConfig, clock: Arc<dyn Clock>) -> Result<SimRegistry, SimConfigError> {
        Ok(SimRegistry {
            world: Arc::new(Mutex::new(World::new(config)?)),
            clock,
        })
    }

    /// Default configuration on a fresh simulated clock.
    pub fn simulated(config: SimConfig) -> Result<SimRegistry, SimConfigError> {
        Self::new(config, Arc::new(SimClock::new()))
    }

    /// Shared handle for inspecting the world after a run.
    pub fn world(&self) -> Arc<Mutex<World>> {
        Arc::clone(&self.world)
    }

    pub fn needle_deflected(&self) -> bool {
        let mut w = self.world.lock().expect("world lock");
        w.flush(self.clock.now_ms());
        w.cluster.needle_deflected
    }

    pub fn bus_log(&self) -> Vec<(u64, CanFrame)> {
        let mut w = self.world.lock().expect("world lock");
        w.flush(self.clock.now_ms());
        w.bus.log().to_vec()
    }

    pub fn dispatch_log(&self) -> Vec<DispatchRecord> {
        self.world.lock().expect("world lock").dispatch_log.clone()
    }
}

impl AdapterRegistry for SimRegistry {
    fn clock(&self) -> Arc<dyn Clock> {
        Arc::clone(&self.clock)
    }

    fn initial_sessions(&mut self) -> Vec<(String, Box<dyn Session>)> {
        let host = SimShell::new("bash", ShellKind::Host, self.world(), self.clock());
        vec![("bash".into(), Box::new(host))]
    }

    fn open_session(&mut self, name: &str) -> Result<Box<dyn Session>, String> {
        Ok(Box::new(SimShell::new(
            name,
            ShellKind::Target,
            self.world(),
            self.clock(),
        )))
    }

    fn oracle(&mut self, name: &str, args: &[Value]) -> Result<bool, String> {
        match (name, args) {
            ("CAN_MESSAGE", [frame]) => {
                let text = frame.to_text();
                let frame = CanFrameText::parse(&text).map_err(|e| e.to_string())?.frame();
                let mut w = self.world.lock().expect("world lock");
                w.flush(self.clock.now_ms());
                Ok(w.bus.contains(&frame, 0, u64::MAX))
            }
            _ => Err(format!("unknown-oracle:{name}/{}", args.len())),
        }
    }

    fn observation_names(&self) -> BTreeSet<String> {
        builtin_observations()
    }
}

/// Registry whose sessions and oracles fail every call.
#[derive(Debug, Default)]
pub struct AlwaysFailRegistry {
    clock: Arc<SimClock>,
}

impl AlwaysFailRegistry {
    pub fn new() -> Self {
        Self::default()
    }
}

struct FailingSession;

impl Session for FailingSession {
    fn dispatch(&mut self, _: &Invocation<'_>) -> Result<AdapterOutput, String> {
        Err("adapter-fault: always failing".into())
    }
}

impl AdapterRegistry for AlwaysFailRegistry {
    fn clock(&self) -> Arc<dyn Clock> {
        self.clock.clone()
    }

    fn initial_sessions(&mut self) -> Vec<(String, Box<dyn Session>)> {
        ["bash", "adb", "bbshell"]
            .into_iter()
            .map(|n| (n.to_string(), Box::new(FailingSession) as Box<dyn Session>))
            .collect()
    }

    fn open_session(&mut self, name: &str) -> Result<Box<dyn Session>, String> {
        Err(format!("adapter-fault: cannot open {name}"))
    }

    fn oracle(&mut self, name: &str, _: &[Value]) -> Result<bool, String> {
        Err(format!("adapter-fault: oracle {name} unavailable"))
    }
}
