//! Timestamp parsing and formatting.
//!
//! All timestamps are UTC with millisecond precision and serialize as
//! RFC3339 with exactly three fractional digits, so equal instants always
//! render to identical bytes.

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use thiserror::Error;

pub type Timestamp = DateTime<Utc>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed timestamp {0:?}: expected RFC3339 or unix milliseconds")]
pub struct MalformedTimestamp(pub String);

/// Canonical text form: RFC3339 UTC with millisecond precision.
pub fn format_ts(ts: Timestamp) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Parse either an RFC3339 timestamp or an integer count of unix
/// milliseconds. Sub-millisecond precision is truncated.
pub fn parse_ts(text: &str) -> Result<Timestamp, MalformedTimestamp> {
    let t = text.trim();
    if !t.is_empty() && t.chars().all(|c| c.is_ascii_digit()) {
        let millis: i64 = t.parse().map_err(|_| MalformedTimestamp(text.to_string()))?;
        return Utc
            .timestamp_millis_opt(millis)
            .single()
            .ok_or_else(|| MalformedTimestamp(text.to_string()));
    }
    let parsed = DateTime::parse_from_rfc3339(t).map_err(|_| MalformedTimestamp(text.to_string()))?;
    Ok(truncate_to_millis(parsed.with_timezone(&Utc)))
}

/// Serde adapter: timestamps as canonical RFC3339 millisecond strings.
pub mod ts_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &Timestamp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_ts(*ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Timestamp, D::Error> {
        let text = String::deserialize(d)?;
        parse_ts(&text).map_err(serde::de::Error::custom)
    }
}

pub fn from_millis(millis: i64) -> Timestamp {
    Utc.timestamp_millis_opt(millis).single().expect("valid millis")
}

fn truncate_to_millis(ts: Timestamp) -> Timestamp {
    from_millis(ts.timestamp_millis())
}
