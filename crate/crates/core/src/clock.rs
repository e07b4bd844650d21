//! Time sources for the executor and simulator.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

/// Milliseconds since the start of a run.
pub trait Clock: Send + Sync + std::fmt::Debug {
    fn now_ms(&self) -> u64;
    fn sleep_ms(&self, ms: u64);
}

/// Manually advanced clock; `sleep_ms` returns immediately after moving time
/// forward, so runs are fast and reproducible.
#[derive(Debug, Default)]
pub struct SimClock {
    now: AtomicU64,
}

impl SimClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, ms: u64) {
        self.now.fetch_add(ms, Ordering::SeqCst);
    }
}

impl Clock for SimClock {
    fn now_ms(&self) -> u64 {
        self.now.load(Ordering::SeqCst)
    }

    fn sleep_ms(&self, ms: u64) {
        self.advance(ms);
    }
}

#[derive(Debug)]
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock {
            start: Instant::now(),
        }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now_ms(&self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }

    fn sleep_ms(&self, ms: u64) {
        std::thread::sleep(Duration::from_millis(ms));
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    #[default]
    Simulated,
    Wall,
}

impl ClockMode {
    pub fn make(self) -> Arc<dyn Clock> {
        match self {
            ClockMode::Simulated => Arc::new(SimClock::new()),
            ClockMode::Wall => Arc::new(WallClock::new()),
        }
    }
}

impl std::str::FromStr for ClockMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simulated" => Ok(ClockMode::Simulated),
            "wall" => Ok(ClockMode::Wall),
            other => Err(format!("unknown clock `{other}` (expected simulated or wall)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sim_clock_advances_only_when_asked() {
        let c = SimClock::new();
        assert_eq!(c.now_ms(), 0);
        c.sleep_ms(150);
        c.advance(50);
        assert_eq!(c.now_ms(), 200);
    }

    #[test]
    fn wall_clock_is_monotonic() {
        let c = WallClock::new();
        let a = c.now_ms();
        c.sleep_ms(2);
        assert!(c.now_ms() >= a + 2);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("wall".parse::<ClockMode>().unwrap(), ClockMode::Wall);
        assert!("fast".parse::<ClockMode>().is_err());
    }
}
