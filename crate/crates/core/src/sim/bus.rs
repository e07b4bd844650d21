//! Virtual CAN bus and the instrument cluster listening on it.

use crate::frame::{CanFrame, CanId};

#[derive(Debug, Clone, PartialEq, Eq)]
struct CyclicSender {
    frame: CanFrame,
    period_ms: u64,
    next_ms: u64,
    /// `None` sends until the run ends.
    remaining: Option<u64>,
}

/// Append-only frame log plus cyclic senders.
///
/// Cyclic senders are advanced lazily: [`VirtualBus::flush`] emits every
/// frame due up to the given time, so the log is exact without background
/// threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VirtualBus {
    log: Vec<(u64, CanFrame)>,
    senders: Vec<CyclicSender>,
}

impl VirtualBus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(&mut self, now_ms: u64, frame: CanFrame) {
        self.flush(now_ms);
        self.log.push((now_ms, frame));
    }

    /// First frame goes out at `now_ms`, then every `period_ms`.
    pub fn send_cyclic(&mut self, now_ms: u64, frame: CanFrame, period_ms: u64, count: Option<u64>) {
        if count == Some(0) {
            return;
        }
        self.flush(now_ms);
        self.senders.push(CyclicSender {
            frame,
            period_ms: period_ms.max(1),
            next_ms: now_ms,
            remaining: count,
        });
        self.flush(now_ms);
    }

    /// Emit all cyclic frames due at or before `now_ms`, in time order
    /// (ties broken by registration order).
    pub fn flush(&mut self, now_ms: u64) {
        loop {
            let due = self
                .senders
                .iter()
                .enumerate()
                .filter(|(_, s)| s.next_ms <= now_ms)
                .min_by_key(|(i, s)| (s.next_ms, *i))
                .map(|(i, _)| i);
            let Some(i) = due else { break };
            let s = &mut self.senders[i];
            self.log.push((s.next_ms, s.frame.clone()));
            s.next_ms += s.period_ms;
            if let Some(r) = &mut s.remaining {
                *r -= 1;
                if *r == 0 {
                    self.senders.remove(i);
                }
            }
        }
    }

    pub fn stop_all(&mut self) {
        self.senders.clear();
    }

    pub fn active_senders(&self) -> usize {
        self.senders.len()
    }

    pub fn log(&self) -> &[(u64, CanFrame)] {
        &self.log
    }

    /// Whether an identical frame was seen within `[from_ms, to_ms]`.
    pub fn contains(&self, frame: &CanFrame, from_ms: u64, to_ms: u64) -> bool {
        self.log
            .iter()
            .any(|(t, f)| *t >= from_ms && *t <= to_ms && f == frame)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstrumentCluster {
    pub speed_id: CanId,
    pub needle_deflected: bool,
    pub last_payload: Vec<u8>,
}

impl InstrumentCluster {
    pub fn new(speed_id: CanId) -> Self {
        InstrumentCluster {
            speed_id,
            needle_deflected: false,
            last_payload: Vec::new(),
        }
    }

    pub fn observe(&mut self, frame: &CanFrame) {
        if frame.id == self.speed_id {
            self.needle_deflected = true;
            self.last_payload = frame.data.clone();
        }
    }

    pub fn reset(&mut self) {
        self.needle_deflected = false;
        self.last_payload.clear();
    }
}
