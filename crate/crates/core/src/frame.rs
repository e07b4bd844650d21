//! `HEXID#HEXDATA` frame text, as used by candump/cansend.
//!
//! Three-digit ids are standard (11-bit), eight-digit ids are extended
//! (29-bit). Data is zero to eight bytes written as pairs of hex digits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad-frame: {text:?}: {reason}")]
pub struct FrameError {
    pub text: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CanId {
    Standard(u16),
    Extended(u32),
}

impl CanId {
    pub fn raw(self) -> u32 {
        match self {
            CanId::Standard(id) => id as u32,
            CanId::Extended(id) => id,
        }
    }
}

impl fmt::Display for CanId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanId::Standard(id) => write!(f, "{id:03X}"),
            CanId::Extended(id) => write!(f, "{id:08X}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanFrame {
    pub id: CanId,
    pub data: Vec<u8>,
}

impl CanFrame {
    pub fn new(id: CanId, data: &[u8]) -> Result<Self, FrameError> {
        let ok_id = match id {
            CanId::Standard(v) => v <= 0x7FF,
            CanId::Extended(v) => v <= 0x1FFF_FFFF,
        };
        if !ok_id {
            return Err(FrameError {
                text: format!("{id}#"),
                reason: "identifier out of range",
            });
        }
        if data.len() > 8 {
            return Err(FrameError {
                text: format!("{id}#"),
                reason: "more than 8 data bytes",
            });
        }
        Ok(CanFrame {
            id,
            data: data.to_vec(),
        })
    }
}

impl FromStr for CanFrame {
    type Err = FrameError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = |reason| FrameError {
            text: text.to_string(),
            reason,
        };
        let (id_hex, data_hex) = text.split_once('#').ok_or_else(|| err("missing '#'"))?;
        if !id_hex.bytes().all(|b| b.is_ascii_hexdigit())
            || !data_hex.bytes().all(|b| b.is_ascii_hexdigit())
        {
            return Err(err("non-hex character"));
        }
        let id = match id_hex.len() {
            3 => CanId::Standard(u16::from_str_radix(id_hex, 16).map_err(|_| err("bad id"))?),
            8 => CanId::Extended(u32::from_str_radix(id_hex, 16).map_err(|_| err("bad id"))?),
            _ => return Err(err("identifier must have 3 or 8 hex digits")),
        };
        if data_hex.len() % 2 != 0 {
            return Err(err("odd number of data digits"));
        }
        if data_hex.len() > 16 {
            return Err(err("more than 8 data bytes"));
        }
        let data = (0..data_hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&data_hex[i..i + 2], 16))
            .collect::<Result<Vec<u8>, _>>()
            .map_err(|_| err("bad data byte"))?;
        CanFrame::new(id, &data).map_err(|e| err(e.reason))
    }
}

impl fmt::Display for CanFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#", self.id)?;
        for b in &self.data {
            write!(f, "{b:02X}")?;
        }
        Ok(())
    }
}

/// Validated frame text, kept exactly as written.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanFrameText(String);

impl CanFrameText {
    pub fn parse(text: &str) -> Result<Self, FrameError> {
        text.parse::<CanFrame>()?;
        Ok(CanFrameText(text.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn frame(&self) -> CanFrame {
        self.0.parse().expect("validated at construction")
    }
}

impl fmt::Display for CanFrameText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for CanFrameText {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for CanFrameText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CanFrameText::parse(&s).map_err(serde::de::Error::custom)
    }
}
