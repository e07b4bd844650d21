//! Golden cases over the checked-in corpus.
//!
//! `corpus/cases.json` lists the cases; each one is checked, compiled and
//! run, and the results are compared with files under `corpus/golden/`.
//! Goldens change only through [`verify_corpus`] with `update = true`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::analyzer::check;
use crate::compiler::{compile, ToolMapping};
use crate::diagnostic::{has_errors, Diagnostic};
use crate::executor::{execute, ExecOptions, ExecutionReport};
use crate::kb::load_profile;
use crate::parser::parse;
use crate::sim::{SimConfig, SimRegistry};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenCase {
    pub name: String,
    pub script: String,
    pub profile: String,
    #[serde(default)]
    pub sim: Option<String>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("corpus case `{case}`: {message}")]
    Case { case: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseResult {
    pub name: String,
    /// One line per golden file that differs.
    pub mismatches: Vec<String>,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Outputs of one case, as they are stored in the goldens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseOutputs {
    pub diagnostics: String,
    pub compiled: String,
    pub report: String,
    pub report_value: ExecutionReport,
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_cases(root: &Path) -> Result<Vec<GoldenCase>, CorpusError> {
    let path = root.join("cases.json");
    serde_json::from_str(&read(&path)?).map_err(|e| CorpusError::Case {
        case: "cases.json".into(),
        message: e.to_string(),
    })
}

pub fn render_diagnostics(file: &str, diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.render(file) + "\n").collect()
}

/// Check, compile and run one case against the simulator.
pub fn run_case(root: &Path, case: &GoldenCase) -> Result<CaseOutputs, CorpusError> {
    let fail = |message: String| CorpusError::Case {
        case: case.name.clone(),
        message,
    };
    let source = read(&root.join(&case.script))?;
    let profile = load_profile(&read(&root.join(&case.profile))?).map_err(|e| fail(e.to_string()))?;
    let sim = match &case.sim {
        Some(p) => SimConfig::load(&read(&root.join(p))?).map_err(|e| fail(e.to_string()))?,
        None => SimConfig::default(),
    };
    let parsed = parse(&source);
    let mut diags = parsed.diagnostics.clone();
    if !parsed.has_errors() {
        diags.extend(check(&parsed.ast, Some(&profile)));
    }
    let file_name = Path::new(&case.script)
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let diagnostics = render_diagnostics(&file_name, &diags);
    let unbound = check(&parsed.ast, None);
    if parsed.has_errors() || has_errors(&unbound) {
        return Err(fail("script does not compile".into()));
    }
    let script = compile(&parsed.ast, &ToolMapping::builtin()).map_err(|e| fail(e.to_string()))?;
    let mut registry = SimRegistry::simulated(sim).map_err(|e| fail(e.to_string()))?;
    let report = execute(&script, &profile, &mut registry, ExecOptions::default())
        .map_err(|e| fail(e.to_string()))?;
    Ok(CaseOutputs {
        diagnostics,
        compiled: script.to_json_pretty() + "\n",
        report: report.to_json_pretty() + "\n",
        report_value: report,
    })
}

/// Run every case and diff against the goldens, or rewrite them when
/// `update` is set.
pub fn verify_corpus(root: &Path, update: bool) -> Result<Vec<CaseResult>, CorpusError> {
    let golden = root.join("golden");
    let mut results = Vec::new();
    for case in load_cases(root)? {
        let out = run_case(root, &case)?;
        let mut mismatches = Vec::new();
        for (suffix, actual) in [
            ("diagnostics.txt", &out.diagnostics),
            ("compiled.json", &out.compiled),
            ("report.json", &out.report),
        ] {
            let path = golden.join(format!("{}.{suffix}", case.name));
            if update {
                fs::write(&path, actual).map_err(|source| CorpusError::Io {
                    path: path.clone(),
                    source,
                })?;
                continue;
            }
            match fs::read_to_string(&path) {
                Ok(expected) if &expected == actual => {}
                Ok(expected) => mismatches.push(first_difference(&path, &expected, actual)),
                Err(_) => mismatches.push(format!("{}: missing golden", path.display())),
            }
        }
        results.push(CaseResult {
            name: case.name,
            mismatches,
        });
    }
    Ok(results)
}

fn first_difference(path: &Path, expected: &str, actual: &str) -> String {
    let mut exp = expected.lines();
    let mut act = actual.lines();
    let mut line = 1;
    loop {
        match (exp.next(), act.next()) {
            (Some(e), Some(a)) if e == a => line += 1,
            (e, a) => {
                return format!(
                    "{}:{line}: expected {:?}, got {:?}",
                    path.display(),
                    e.unwrap_or("<end>"),
                    a.unwrap_or("<end>")
                )
            }
        }
    }
}
