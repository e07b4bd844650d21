//! Placeholder syntax shared by tool-mapping templates and compiled command
//! parameters.
//!
//! * `{name}` or `{name.field}`: a placeholder
//! * `{name?}`: optional (templates only); the whole item is dropped when the
//!   argument is not supplied
//! * `{name|head}` / `{name|tail}`: first whitespace-separated word / the
//!   remaining words, `tail` expanding to zero or more parameters
//! * `{{` and `}}`: literal braces

use std::fmt;

use thiserror::Error;

use crate::ast::is_identifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modifier {
    Head,
    Tail,
}

impl Modifier {
    fn as_str(self) -> &'static str {
        match self {
            Modifier::Head => "head",
            Modifier::Tail => "tail",
        }
    }

    /// Apply to already-resolved text.
    pub fn apply(self, text: &str) -> Vec<String> {
        let mut words = text.split_whitespace();
        match self {
            Modifier::Head => vec![words.next().unwrap_or("").to_string()],
            Modifier::Tail => {
                words.next();
                words.map(str::to_string).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placeholder {
    pub path: Vec<String>,
    pub optional: bool,
    pub modifier: Option<Modifier>,
}

impl Placeholder {
    pub fn root(&self) -> &str {
        &self.path[0]
    }

    pub fn dotted(&self) -> String {
        self.path.join(".")
    }
}

impl fmt::Display for Placeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}", self.dotted())?;
        if self.optional {
            f.write_str("?")?;
        }
        if let Some(m) = self.modifier {
            write!(f, "|{}", m.as_str())?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Literal(String),
    Hole(Placeholder),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad placeholder syntax in {text:?}: {reason}")]
pub struct TemplateSyntaxError {
    pub text: String,
    pub reason: String,
}

pub fn parse_template(text: &str) -> Result<Vec<Piece>, TemplateSyntaxError> {
    let err = |reason: &str| TemplateSyntaxError {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let mut pieces = Vec::new();
    let mut lit = String::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '{' if matches!(chars.peek(), Some((_, '{'))) => {
                chars.next();
                lit.push('{');
            }
            '}' if matches!(chars.peek(), Some((_, '}'))) => {
                chars.next();
                lit.push('}');
            }
            '}' => return Err(err("unmatched `}`")),
            '{' => {
                let rest = &text[i + 1..];
                let close = rest.find('}').ok_or_else(|| err("unclosed `{`"))?;
                let inner = &rest[..close];
                for _ in 0..inner.chars().count() + 1 {
                    chars.next();
                }
                if !lit.is_empty() {
                    pieces.push(Piece::Literal(std::mem::take(&mut lit)));
                }
                pieces.push(Piece::Hole(parse_placeholder(inner).map_err(|r| err(&r))?));
            }
            c => lit.push(c),
        }
    }
    if !lit.is_empty() {
        pieces.push(Piece::Literal(lit));
    }
    Ok(pieces)
}

fn parse_placeholder(inner: &str) -> Result<Placeholder, String> {
    let (body, modifier) = match inner.split_once('|') {
        Some((b, "head")) => (b, Some(Modifier::Head)),
        Some((b, "tail")) => (b, Some(Modifier::Tail)),
        Some((_, m)) => return Err(format!("unknown modifier `{m}`")),
        None => (inner, None),
    };
    let (body, optional) = match body.strip_suffix('?') {
        Some(b) => (b, true),
        None => (body, false),
    };
    let path: Vec<String> = body.split('.').map(str::to_string).collect();
    if !path.iter().all(|s| is_identifier(s)) {
        return Err(format!("`{body}` is not a variable path"));
    }
    Ok(Placeholder {
        path,
        optional,
        modifier,
    })
}

/// Double literal braces so they survive placeholder parsing.
pub fn escape_braces(s: &str) -> String {
    s.replace('{', "{{").replace('}', "}}")
}
