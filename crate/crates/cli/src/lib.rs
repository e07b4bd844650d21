//! Command line and HTTP front ends.

pub mod commands;
pub mod server;

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use alia_core::executor::{execute, ExecOptions, DEFAULT_LOOP_CAP, DEFAULT_TIMEOUT_MS};
use alia_core::sim::{SimConfig, SimRegistry};
use alia_core::{ClockMode, CompiledScript, ExecutionReport, InvalidScript, SutProfile};

/// Knobs shared by `run` and `POST /execute`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub clock: ClockMode,
    pub loop_cap: u64,
    pub default_timeout_ms: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            clock: ClockMode::Simulated,
            loop_cap: DEFAULT_LOOP_CAP,
            default_timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }
}

/// Run `script` against the simulator. Both front ends go through here, so
/// identical inputs give identical reports.
pub fn run_script(
    script: &CompiledScript,
    profile: &SutProfile,
    sim: &SimConfig,
    opts: RunOptions,
) -> anyhow::Result<Result<ExecutionReport, InvalidScript>> {
    let mut registry = SimRegistry::new(sim.clone(), opts.clock.make())?;
    Ok(execute(
        script,
        profile,
        &mut registry,
        ExecOptions {
            loop_cap: opts.loop_cap,
            default_timeout_ms: opts.default_timeout_ms,
        },
    ))
}

pub fn read_file(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_profile_file(path: &Path) -> anyhow::Result<SutProfile> {
    alia_core::load_profile(&read_file(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn load_sim_file(path: Option<&Path>) -> anyhow::Result<SimConfig> {
    match path {
        Some(p) => SimConfig::load(&read_file(p)?).with_context(|| format!("in {}", p.display())),
        None => Ok(SimConfig::default()),
    }
}

/// Every `*.json` profile in `dir`, keyed by profile id.
pub fn load_profile_dir(dir: &Path) -> anyhow::Result<BTreeMap<String, SutProfile>> {
    let mut profiles = BTreeMap::new();
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read profile directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let profile = load_profile_file(&path)?;
        if let Some(prev) = profiles.insert(profile.id.clone(), profile) {
            bail!("profile id `{}` is defined twice (again in {})", prev.id, path.display());
        }
    }
    Ok(profiles)
}
