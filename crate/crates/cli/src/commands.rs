//! Subcommand bodies. Each returns the process exit code; `Err` means a
//! usage or I/O problem (exit 2).

use std::io::Write;
use std::path::Path;

use anyhow::Context;

use alia_core::corpus::{render_diagnostics, verify_corpus};
use alia_core::diagnostic::{has_errors, Diagnostic};
use alia_core::{check, compile, load_tool_mapping, parse, CompiledScript, ToolMapping};

use crate::{load_profile_file, load_sim_file, read_file, run_script, RunOptions};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Parse diagnostics, then (if the parse succeeded) analyzer findings.
fn diagnose(source: &str, profile: Option<&alia_core::SutProfile>) -> (alia_core::parser::Parsed, Vec<Diagnostic>) {
    let parsed = parse(source);
    let mut diags = parsed.diagnostics.clone();
    if !parsed.has_errors() {
        diags.extend(check(&parsed.ast, profile));
    }
    (parsed, diags)
}

pub fn check_cmd(file: &Path, profile: Option<&Path>, out: &mut dyn Write) -> anyhow::Result<u8> {
    let source = read_file(file)?;
    let profile = profile.map(load_profile_file).transpose()?;
    let (_, diags) = diagnose(&source, profile.as_ref());
    out.write_all(render_diagnostics(&file_label(file), &diags).as_bytes())?;
    Ok(if has_errors(&diags) { EXIT_FAILED } else { EXIT_OK })
}

pub fn compile_cmd(
    file: &Path,
    mapping: Option<&Path>,
    output: Option<&Path>,
    pretty: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<u8> {
    let source = read_file(file)?;
    let mapping = match mapping {
        Some(p) => load_tool_mapping(&read_file(p)?).with_context(|| format!("in {}", p.display()))?,
        None => ToolMapping::builtin(),
    };
    let (parsed, diags) = diagnose(&source, None);
    err.write_all(render_diagnostics(&file_label(file), &diags).as_bytes())?;
    if has_errors(&diags) {
        return Ok(EXIT_FAILED);
    }
    let script = match compile(&parsed.ast, &mapping) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_FAILED);
        }
    };
    let text = if pretty { script.to_json_pretty() } else { script.to_json() };
    match output {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("cannot write {}", p.display()))?,
        None => writeln!(out, "{text}")?,
    }
    Ok(EXIT_OK)
}

pub struct RunArgs<'a> {
    pub script: &'a Path,
    pub profile: &'a Path,
    pub sim: Option<&'a Path>,
    pub report: Option<&'a Path>,
    pub table: bool,
    pub fail_on_failed: bool,
    pub options: RunOptions,
}

pub fn run_cmd(args: &RunArgs<'_>, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<u8> {
    let document = read_file(args.script)?;
    let profile = load_profile_file(args.profile)?;
    let sim = load_sim_file(args.sim)?;
    let script = match CompiledScript::from_json(&document) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_FAILED);
        }
    };
    let report = match run_script(&script, &profile, &sim, args.options)? {
        Ok(r) => r,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_FAILED);
        }
    };
    if let Some(p) = args.report {
        std::fs::write(p, report.to_json()).with_context(|| format!("cannot write {}", p.display()))?;
    }
    if args.table {
        out.write_all(report.to_table().as_bytes())?;
    } else if args.report.is_none() {
        writeln!(out, "{}", report.to_json_pretty())?;
    }
    Ok(if args.fail_on_failed && report.has_failures() {
        EXIT_FAILED
    } else {
        EXIT_OK
    })
}

pub fn corpus_cmd(root: &Path, update: bool, out: &mut dyn Write) -> anyhow::Result<u8> {
    let results = verify_corpus(root, update)?;
    let mut failed = false;
    for r in &results {
        if update {
            writeln!(out, "updated {}", r.name)?;
            continue;
        }
        writeln!(out, "{} {}", if r.passed() { "PASS" } else { "FAIL" }, r.name)?;
        for m in &r.mismatches {
            writeln!(out, "  {m}")?;
        }
        failed |= !r.passed();
    }
    Ok(if failed { EXIT_FAILED } else { EXIT_OK })
}
