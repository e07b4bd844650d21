use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::compiler::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Ok,
    Failed,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::Failed => "FAILED",
            Status::Skipped => "SKIPPED",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub seq: u64,
    pub label: Option<String>,
    pub phase: Option<Phase>,
    pub status: Status,
    pub message: String,
    pub output: String,
    /// Clock reading when the entry was produced; shown in the table only.
    #[serde(skip)]
    pub time_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExecutionReport {
    pub entries: Vec<ReportEntry>,
}

impl ExecutionReport {
    pub fn statuses(&self) -> Vec<Status> {
        self.entries.iter().map(|e| e.status).collect()
    }

    pub fn has_failures(&self) -> bool {
        self.entries.iter().any(|e| e.status == Status::Failed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Three-column `Time | Status | Debug message` rendering.
    pub fn to_table(&self) -> String {
        let rows: Vec<(String, &str, String)> = self
            .entries
            .iter()
            .map(|e| (format!("{} ms", e.time_ms), e.status.as_str(), e.message.clone()))
            .collect();
        let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(4);
        let w1 = 7;
        let mut out = String::new();
        let _ = writeln!(out, "{:<w0$} | {:<w1$} | Debug message", "Time", "Status");
        let _ = writeln!(out, "{}-+-{}-+-{}", "-".repeat(w0), "-".repeat(w1), "-".repeat(13));
        for (t, s, m) in rows {
            let _ = writeln!(out, "{t:<w0$} | {s:<w1$} | {m}");
        }
        out
    }
}
