use std::fmt;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

/// Which bound stopped a semi-decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    Fuel,
    Depth,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Limit::Fuel => "fuel",
            Limit::Depth => "depth",
        })
    }
}

/// Three-valued answer of a bounded check. `Refuted` carries a witness that
/// can be replayed.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<W> {
    Verified,
    Refuted(W),
    Unknown(Limit),
}

impl<W> Verdict<W> {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified)
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Refuted(w) => Some(w),
            _ => None,
        }
    }

    pub fn map_witness<V>(self, f: impl FnOnce(W) -> V) -> Verdict<V> {
        match self {
            Verdict::Verified => Verdict::Verified,
            Verdict::Refuted(w) => Verdict::Refuted(f(w)),
            Verdict::Unknown(l) => Verdict::Unknown(l),
        }
    }

    /// `"verified"`, `"refuted"` or `"unknown"`.
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::Refuted(_) => "refuted",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

/// `{"verdict": "verified"}`, `{"verdict": "refuted", "witness": …}` or
/// `{"verdict": "unknown", "reason": "fuel" | "depth"}`.
impl<W: Serialize> Serialize for Verdict<W> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("verdict", self.label())?;
        match self {
            Verdict::Verified => {}
            Verdict::Refuted(w) => m.serialize_entry("witness", w)?,
            Verdict::Unknown(l) => m.serialize_entry("reason", l)?,
        }
        m.end()
    }
}
