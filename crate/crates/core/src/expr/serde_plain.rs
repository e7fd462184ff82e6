//! Serde adapter storing expressions as their plain-text rendering.

use serde::{Deserialize, Deserializer, Serializer};

use super::{parse, to_plain, SumExpr};

pub fn serialize<S: Serializer>(e: &SumExpr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_plain(e))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SumExpr, D::Error> {
    let src = String::deserialize(d)?;
    parse(&src).map_err(|e| serde::de::Error::custom(format!("{src}: {e}")))
}
