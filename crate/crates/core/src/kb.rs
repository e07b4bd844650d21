//! Per-SUT profiles: system variables, CAN message symbols and script
//! payload bindings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::CanFrameText;
use crate::value::Value;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("malformed-profile: {0}")]
    Malformed(String),
    #[error("bad-frame: message `{symbol}`: {reason}")]
    BadFrame { symbol: String, reason: String },
    #[error("malformed-profile: `{0}` is defined in more than one table")]
    DuplicateKey(String),
}

impl ProfileError {
    pub fn code(&self) -> &'static str {
        match self {
            ProfileError::Malformed(_) | ProfileError::DuplicateKey(_) => "malformed-profile",
            ProfileError::BadFrame { .. } => "bad-frame",
        }
    }
}

/// Knowledge-base document for one system under test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SutProfile {
    pub id: String,
    pub variables: BTreeMap<String, String>,
    pub messages: BTreeMap<String, CanFrameText>,
    pub scripts: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct RawProfile {
    id: String,
    #[serde(default)]
    variables: BTreeMap<String, String>,
    #[serde(default)]
    messages: BTreeMap<String, String>,
    #[serde(default)]
    scripts: BTreeMap<String, String>,
}

impl SutProfile {
    pub fn new(id: impl Into<String>) -> Self {
        SutProfile {
            id: id.into(),
            variables: BTreeMap::new(),
            messages: BTreeMap::new(),
            scripts: BTreeMap::new(),
        }
    }

    pub fn load(document: &str) -> Result<SutProfile, ProfileError> {
        let raw: RawProfile =
            serde_json::from_str(document).map_err(|e| ProfileError::Malformed(e.to_string()))?;
        if raw.id.is_empty() {
            return Err(ProfileError::Malformed("empty `id`".into()));
        }
        let mut messages = BTreeMap::new();
        for (symbol, text) in raw.messages {
            let frame = CanFrameText::parse(&text).map_err(|e| ProfileError::BadFrame {
                symbol: symbol.clone(),
                reason: format!("{:?}: {}", e.text, e.reason),
            })?;
            messages.insert(symbol, frame);
        }
        for key in raw.variables.keys() {
            if messages.contains_key(key) || raw.scripts.contains_key(key) {
                return Err(ProfileError::DuplicateKey(key.clone()));
            }
        }
        for key in messages.keys() {
            if raw.scripts.contains_key(key) {
                return Err(ProfileError::DuplicateKey(key.clone()));
            }
        }
        Ok(SutProfile {
            id: raw.id,
            variables: raw.variables,
            messages,
            scripts: raw.scripts,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    /// Look `name` up in variables, then messages, then script bindings.
    pub fn resolve(&self, name: &str) -> Option<Value> {
        self.variables
            .get(name)
            .cloned()
            .or_else(|| self.messages.get(name).map(|f| f.as_str().to_string()))
            .or_else(|| self.scripts.get(name).cloned())
            .map(Value::Text)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.variables.contains_key(name)
            || self.messages.contains_key(name)
            || self.scripts.contains_key(name)
    }
}

pub fn load_profile(document: &str) -> Result<SutProfile, ProfileError> {
    SutProfile::load(document)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn profile_a() -> SutProfile {
        load_profile(
            r#"{"id":"A","variables":{"ip_addr":"192.168.1.1"},"messages":{"MSG_SPD":"123#ABCD000000"}}"#,
        )
        .unwrap()
    }

    #[test]
    fn loads_profile_a() {
        let a = profile_a();
        assert_eq!(a.id, "A");
        assert_eq!(a.variables["ip_addr"], "192.168.1.1");
        assert_eq!(a.messages["MSG_SPD"].as_str(), "123#ABCD000000");
    }

    #[test]
    fn loads_profile_b() {
        let b = load_profile(r#"{"id":"B","messages":{"MSG_SPD":"200#CAFE123456"}}"#).unwrap();
        assert_eq!(b.resolve("MSG_SPD"), Some(Value::text("200#CAFE123456")));
        assert!(b.variables.is_empty());
    }

    #[test]
    fn loads_empty() {
        let p = load_profile(r#"{"id":"empty"}"#).unwrap();
        assert!(p.variables.is_empty() && p.messages.is_empty() && p.scripts.is_empty());
    }

    #[test]
    fn resolve_order() {
        let a = profile_a();
        assert_eq!(a.resolve("ip_addr"), Some(Value::text("192.168.1.1")));
        assert_eq!(a.resolve("MSG_SPD"), Some(Value::text("123#ABCD000000")));
        assert_eq!(a.resolve("nonexistent"), None);
    }

    #[test]
    fn errors() {
        assert_eq!(load_profile("{").unwrap_err().code(), "malformed-profile");
        assert_eq!(load_profile(r#"{"variables":{}}"#).unwrap_err().code(), "malformed-profile");
        let bad = load_profile(r#"{"id":"x","messages":{"MSG_SPD":"ZZZ#00"}}"#).unwrap_err();
        assert_eq!(bad.code(), "bad-frame");
        assert!(bad.to_string().contains("MSG_SPD"));
        let dup = load_profile(r#"{"id":"x","variables":{"A":"1"},"messages":{"A":"123#"}}"#)
            .unwrap_err();
        assert_eq!(dup.code(), "malformed-profile");
    }

    #[test]
    fn corpus_profiles_load() {
        for doc in [
            include_str!("../../../corpus/profiles/lab-a.sut.json"),
            include_str!("../../../corpus/profiles/mazda3-2012.sut.json"),
            include_str!("../../../corpus/profiles/vehicle-b.sut.json"),
            include_str!("../../../corpus/profiles/empty.sut.json"),
            include_str!("../../../corpus/profiles/skip-chain.sut.json"),
        ] {
            load_profile(doc).unwrap();
        }
    }

    proptest! {
        #[test]
        fn serialize_load_round_trip(
            id in "[a-z0-9-]{1,10}",
            vars in prop::collection::btree_map("v[a-z_]{0,6}", "[ -~]{0,12}", 0..5),
            msgs in prop::collection::btree_map("M[A-Z_]{0,6}", "[0-7][0-9A-F]{2}#([0-9A-F]{2}){0,8}", 0..4),
            scripts in prop::collection::btree_map("S[a-z]{0,6}", "[a-z/._]{1,12}", 0..3),
        ) {
            let mut p = SutProfile::new(id);
            p.variables = vars;
            p.messages = msgs.into_iter().map(|(k, v)| (k, CanFrameText::parse(&v).unwrap())).collect();
            p.scripts = scripts;
            let again = load_profile(&p.to_json()).unwrap();
            prop_assert_eq!(again, p);
        }
    }
}
