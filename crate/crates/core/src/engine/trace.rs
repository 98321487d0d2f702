use std::io::Write;

use serde::{Deserialize, Serialize, Serializer};

use crate::policies::Arm;

/// One player's view of one turn: where it stood before moving, the arm it
/// pulled, the RSS it sampled and the reward it received for the previous
/// arm. Serialized as one JSON object per line; `arm` is written as `+x`,
/// `-x`, `+y` or `-y`, absent values as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub turn: u64,
    pub player: usize,
    pub x: f64,
    pub y: f64,
    #[serde(serialize_with = "arm_symbol", deserialize_with = "parse_arm")]
    pub arm: Option<Arm>,
    pub rss: Option<f64>,
    pub reward: Option<f64>,
}

fn arm_symbol<S: Serializer>(arm: &Option<Arm>, s: S) -> Result<S::Ok, S::Error> {
    match arm {
        Some(a) => s.serialize_str(a.symbol()),
        None => s.serialize_none(),
    }
}

fn parse_arm<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Arm>, D::Error> {
    let raw: Option<String> = Option::deserialize(d)?;
    raw.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
}

/// Writes records as line-delimited JSON.
pub fn write_trace<W: Write>(mut out: W, records: &[TraceRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
