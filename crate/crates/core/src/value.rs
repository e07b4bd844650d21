//! Runtime values held by variables.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Dynamically typed variable content.
///
/// `Absent` marks a variable that was never assigned or whose producing
/// action did not succeed. Reading it is not an error; it is simply falsy.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Value {
    Text(String),
    Integer(i64),
    Boolean(bool),
    #[default]
    Absent,
    Structured(BTreeMap<String, Value>),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn structured<K: Into<String>>(fields: impl IntoIterator<Item = (K, Value)>) -> Value {
        Value::Structured(fields.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    /// Interpret raw tool output: integers stay numeric, empty output from a
    /// successful command counts as `true`.
    pub fn from_output(output: &str) -> Value {
        let trimmed = output.trim();
        if trimmed.is_empty() {
            Value::Boolean(true)
        } else if let Ok(n) = trimmed.parse::<i64>() {
            Value::Integer(n)
        } else {
            Value::Text(trimmed.to_string())
        }
    }

    pub fn is_truthy(&self) -> bool {
        match self {
            Value::Absent => false,
            Value::Boolean(b) => *b,
            Value::Text(s) => !s.is_empty(),
            Value::Integer(n) => *n != 0,
            Value::Structured(_) => true,
        }
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, Value::Absent)
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Text(_) => "text",
            Value::Integer(_) => "integer",
            Value::Boolean(_) => "boolean",
            Value::Absent => "absent",
            Value::Structured(_) => "structured",
        }
    }

    /// Text rendering used when a value is substituted into a command line.
    /// Structured values render as compact JSON with sorted keys.
    pub fn to_text(&self) -> String {
        match self {
            Value::Text(s) => s.clone(),
            Value::Integer(n) => n.to_string(),
            Value::Boolean(b) => b.to_string(),
            Value::Absent => String::new(),
            Value::Structured(_) => self.to_json().to_string(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Text(s) => serde_json::Value::String(s.clone()),
            Value::Integer(n) => serde_json::Value::from(*n),
            Value::Boolean(b) => serde_json::Value::Bool(*b),
            Value::Absent => serde_json::Value::Null,
            Value::Structured(map) => serde_json::Value::Object(
                map.iter().map(|(k, v)| (k.clone(), v.to_json())).collect(),
            ),
        }
    }

    pub fn get_field(&self, name: &str) -> Option<&Value> {
        match self {
            Value::Structured(map) => map.get(name),
            _ => None,
        }
    }

    /// Follow a dotted path below this value; missing fields read as `Absent`.
    pub fn read_path(&self, path: &[impl AsRef<str>]) -> Value {
        let mut cur = self;
        for seg in path {
            match cur.get_field(seg.as_ref()) {
                Some(v) => cur = v,
                None => return Value::Absent,
            }
        }
        cur.clone()
    }

    /// Return a copy with the field at `path` replaced by `new`.
    ///
    /// Writing below a non-structured value promotes it to an empty
    /// structure; the previous content is dropped.
    pub fn write_path(self, path: &[impl AsRef<str>], new: Value) -> Value {
        let Some((head, rest)) = path.split_first() else {
            return new;
        };
        let mut map = match self {
            Value::Structured(map) => map,
            Value::Absent => BTreeMap::new(),
            other => {
                tracing::debug!(
                    discarded = %other,
                    field = head.as_ref(),
                    "promoting {} value to structured",
                    other.type_name()
                );
                BTreeMap::new()
            }
        };
        let child = map.remove(head.as_ref()).unwrap_or(Value::Absent);
        map.insert(head.as_ref().to_string(), child.write_path(rest, new));
        Value::Structured(map)
    }

    /// Ordering used by comparison operators.
    ///
    /// Integers compare numerically, everything else as text. `Absent` is
    /// only equal to itself and is unordered against everything.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Absent, Value::Absent) => Some(Ordering::Equal),
            (Value::Absent, _) | (_, Value::Absent) => None,
            (Value::Integer(a), Value::Integer(b)) => Some(a.cmp(b)),
            (a, b) => Some(a.to_text().cmp(&b.to_text())),
        }
    }

    pub fn loosely_equals(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Absent, Value::Absent) => true,
            (Value::Absent, _) | (_, Value::Absent) => false,
            _ => self.compare(other) == Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Absent => f.write_str("<absent>"),
            other => f.write_str(&other.to_text()),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Integer(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Boolean(b)
    }
}
