//! Tool-mapping catalog: which environment, tool and parameter template each
//! `scan:Type` / `exploit:Type` lowers to.
//!
//! ```json
//! {
//!   "exploit:OpenADB": {
//!     "description": "Connect to the Android debug bridge of the target",
//!     "args": ["target"],
//!     "template": {"environment": "bash", "tool": "adb", "parameters": ["connect", "{target}"]}
//!   }
//! }
//! ```
//!
//! `template` may also be an array of variants; the compiler picks the first
//! one whose required argument placeholders are all supplied by the call.
//! Placeholders whose root is listed under `system` are left for the
//! executor to resolve from the profile.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

use super::template::{parse_template, Modifier, Piece, Placeholder};
use crate::ast::{is_identifier, CallKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("malformed-mapping: {0}")]
    Malformed(String),
    #[error("template-arity: {0}")]
    TemplateArity(String),
}

impl MappingError {
    pub fn code(&self) -> &'static str {
        match self {
            MappingError::Malformed(_) => "malformed-mapping",
            MappingError::TemplateArity(_) => "template-arity",
        }
    }
}

/// One parsed command template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub environment: Vec<Piece>,
    pub tool: Vec<Piece>,
    pub parameters: Vec<Vec<Piece>>,
}

impl Template {
    fn placeholders(&self) -> impl Iterator<Item = &Placeholder> {
        std::iter::once(&self.environment)
            .chain(std::iter::once(&self.tool))
            .chain(self.parameters.iter())
            .flatten()
            .filter_map(|p| match p {
                Piece::Hole(h) => Some(h),
                Piece::Literal(_) => None,
            })
    }

    /// Argument names that must be supplied for this variant to apply.
    pub fn required_args<'a>(&'a self, entry: &'a MappingEntry) -> BTreeSet<&'a str> {
        self.placeholders()
            .filter(|h| !h.optional && entry.args.contains(h.root()))
            .map(Placeholder::root)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingEntry {
    pub description: Option<String>,
    pub args: BTreeSet<String>,
    pub system: BTreeSet<String>,
    pub variants: Vec<Template>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ToolMapping {
    entries: BTreeMap<(CallKind, String), MappingEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    args: Vec<String>,
    #[serde(default)]
    system: Vec<String>,
    template: RawTemplates,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTemplates {
    One(RawTemplate),
    Many(Vec<RawTemplate>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemplate {
    environment: String,
    tool: String,
    #[serde(default)]
    parameters: Vec<String>,
}

const DEFAULT_CATALOG: &str = include_str!("../../../../corpus/mapping/default.catalog.json");

impl ToolMapping {
    /// The catalog shipped with the corpus, covering every function type
    /// used by the reference scripts.
    pub fn builtin() -> ToolMapping {
        load_tool_mapping(DEFAULT_CATALOG).expect("default catalog is valid")
    }

    pub fn get(&self, kind: CallKind, func_type: &str) -> Option<&MappingEntry> {
        self.entries.get(&(kind, func_type.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = String> + '_ {
        self.entries.keys().map(|(k, t)| format!("{k}:{t}"))
    }
}

pub fn load_tool_mapping(document: &str) -> Result<ToolMapping, MappingError> {
    if document.trim().is_empty() {
        return Ok(ToolMapping::default());
    }
    let raw: BTreeMap<String, RawEntry> =
        serde_json::from_str(document).map_err(|e| MappingError::Malformed(e.to_string()))?;
    let mut entries = BTreeMap::new();
    for (key, entry) in raw {
        let (kind, func_type) = parse_key(&key)?;
        let args: BTreeSet<String> = entry.args.into_iter().collect();
        let system: BTreeSet<String> = entry.system.into_iter().collect();
        for name in args.iter().chain(&system) {
            if !is_identifier(name) || name == "type" {
                return Err(MappingError::Malformed(format!(
                    "`{key}`: `{name}` is not a valid argument name"
                )));
            }
        }
        let raw_variants = match entry.template {
            RawTemplates::One(t) => vec![t],
            RawTemplates::Many(ts) => ts,
        };
        if raw_variants.is_empty() {
            return Err(MappingError::Malformed(format!("`{key}` has no template")));
        }
        let mut variants = Vec::with_capacity(raw_variants.len());
        for t in raw_variants {
            let template = parse_raw_template(&key, &t)?;
            for hole in template.placeholders() {
                if !args.contains(hole.root()) && !system.contains(hole.root()) {
                    return Err(MappingError::TemplateArity(format!(
                        "`{key}`: placeholder {hole} is neither an argument nor a system variable"
                    )));
                }
            }
            variants.push(template);
        }
        entries.insert(
            (kind, func_type),
            MappingEntry {
                description: entry.description,
                args,
                system,
                variants,
            },
        );
    }
    Ok(ToolMapping { entries })
}

fn parse_key(key: &str) -> Result<(CallKind, String), MappingError> {
    let bad = || MappingError::Malformed(format!("key `{key}` is not `scan:Type` or `exploit:Type`"));
    let (kind, func_type) = key.split_once(':').ok_or_else(bad)?;
    let kind = match kind {
        "scan" => CallKind::Scan,
        "exploit" => CallKind::Exploit,
        _ => return Err(bad()),
    };
    if !is_identifier(func_type) {
        return Err(bad());
    }
    Ok((kind, func_type.to_string()))
}

fn parse_raw_template(key: &str, t: &RawTemplate) -> Result<Template, MappingError> {
    let parse = |text: &str| {
        parse_template(text).map_err(|e| MappingError::Malformed(format!("`{key}`: {e}")))
    };
    let single = |text: &str, field: &str| -> Result<Vec<Piece>, MappingError> {
        let pieces = parse(text)?;
        for p in &pieces {
            if let Piece::Hole(h) = p {
                if h.optional || h.modifier == Some(Modifier::Tail) {
                    return Err(MappingError::Malformed(format!(
                        "`{key}`: {field} cannot use {h}"
                    )));
                }
            }
        }
        if pieces.is_empty() {
            return Err(MappingError::Malformed(format!("`{key}`: empty {field}")));
        }
        Ok(pieces)
    };
    let environment = single(&t.environment, "environment")?;
    let tool = single(&t.tool, "tool")?;
    let mut parameters = Vec::with_capacity(t.parameters.len());
    for p in &t.parameters {
        let pieces = parse(p)?;
        let has_tail = pieces
            .iter()
            .any(|p| matches!(p, Piece::Hole(h) if h.modifier == Some(Modifier::Tail)));
        if has_tail && pieces.len() != 1 {
            return Err(MappingError::Malformed(format!(
                "`{key}`: `|tail` must make up a whole parameter in {p:?}"
            )));
        }
        parameters.push(pieces);
    }
    Ok(Template {
        environment,
        tool,
        parameters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_covers_reference_types() {
        let m = ToolMapping::builtin();
        for (kind, t) in [
            (CallKind::Exploit, "OpenADB"),
            (CallKind::Exploit, "ScriptExecution"),
            (CallKind::Scan, "BlueBorne"),
            (CallKind::Exploit, "BlueBorne"),
            (CallKind::Exploit, "OpenAndroidHotspot"),
            (CallKind::Exploit, "InstallPythonEnv"),
            (CallKind::Exploit, "InstallAndroidCANDosScript"),
            (CallKind::Exploit, "InstallPythonLib"),
        ] {
            assert!(m.get(kind, t).is_some(), "{kind}:{t}");
        }
        let adb = m.get(CallKind::Exploit, "OpenADB").unwrap();
        assert_eq!(adb.variants.len(), 1);
        let v = &adb.variants[0];
        assert_eq!(v.environment, [Piece::Literal("bash".into())]);
        assert_eq!(v.tool, [Piece::Literal("adb".into())]);
        assert_eq!(v.parameters.len(), 2);
    }

    #[test]
    fn empty_document_is_empty_mapping() {
        assert!(load_tool_mapping("").unwrap().is_empty());
        assert!(load_tool_mapping("{}").unwrap().is_empty());
    }

    #[test]
    fn undeclared_placeholder_is_template_arity() {
        let doc = r#"{"exploit:X":{"args":["a"],"template":{"environment":"bash","tool":"t","parameters":["{b}"]}}}"#;
        assert_eq!(load_tool_mapping(doc).unwrap_err().code(), "template-arity");
        let ok = r#"{"exploit:X":{"args":["a"],"system":["b"],"template":{"environment":"bash","tool":"t","parameters":["{a}","{b}"]}}}"#;
        load_tool_mapping(ok).unwrap();
    }

    #[test]
    fn malformed_documents() {
        for doc in [
            "[",
            "[]",
            r#"{"exploit":{"template":{"environment":"b","tool":"t"}}}"#,
            r#"{"hack:X":{"template":{"environment":"b","tool":"t"}}}"#,
            r#"{"exploit:X":{"template":[]}}"#,
            r#"{"exploit:X":{"template":{"environment":"","tool":"t"}}}"#,
            r#"{"exploit:X":{"args":["a"],"template":{"environment":"b","tool":"{a?}"}}}"#,
            r#"{"exploit:X":{"args":["a"],"template":{"environment":"b","tool":"t","parameters":["x{a|tail}"]}}}"#,
            r#"{"exploit:X":{"template":{"environment":"b","tool":"t","parameters":["{"]}}}"#,
            r#"{"exploit:X":{"extra":1,"template":{"environment":"b","tool":"t"}}}"#,
        ] {
            assert_eq!(load_tool_mapping(doc).unwrap_err().code(), "malformed-mapping", "{doc}");
        }
    }

    /// Every placeholder of every shipped template names a declared argument
    /// or system variable, enumerated independently of the loader.
    #[test]
    fn shipped_catalog_placeholders_are_declared() {
        let raw: serde_json::Value = serde_json::from_str(DEFAULT_CATALOG).unwrap();
        for (key, entry) in raw.as_object().unwrap() {
            let declared: Vec<&str> = ["args", "system"]
                .iter()
                .flat_map(|k| entry.get(*k).and_then(|v| v.as_array()).into_iter().flatten())
                .map(|v| v.as_str().unwrap())
                .collect();
            let text = entry["template"].to_string();
            for chunk in text.split('{').skip(1) {
                let name: String = chunk
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                    .collect();
                if !name.is_empty() {
                    assert!(declared.contains(&name.as_str()), "{key}: {name}");
                }
            }
        }
    }
}
