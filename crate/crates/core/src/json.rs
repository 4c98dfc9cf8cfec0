//! JSON helpers: rationals travel as `"p/q"` strings.
//!
//! Plain JSON numbers are accepted on input and converted exactly from
//! their decimal text.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{format_q, parse_q, Q};

/// Serde wrapper for an exact rational.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(pub Q);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(D::Error::custom(format!("expected a rational, found {other}"))),
        };
        parse_q(&text).map(Rat).map_err(D::Error::custom)
    }
}

impl From<Q> for Rat {
    fn from(q: Q) -> Self {
        Rat(q)
    }
}

impl From<&Q> for Rat {
    fn from(q: &Q) -> Self {
        Rat(q.clone())
    }
}

pub fn rats(values: &[Q]) -> Vec<Rat> {
    values.iter().map(Rat::from).collect()
}

pub fn unrats(values: Vec<Rat>) -> Vec<Q> {
    values.into_iter().map(|r| r.0).collect()
}

pub fn rat_map<K: Ord + Clone>(values: &BTreeMap<K, Q>) -> BTreeMap<K, Rat> {
    values.iter().map(|(k, v)| (k.clone(), Rat::from(v))).collect()
}

pub fn unrat_map<K: Ord>(values: BTreeMap<K, Rat>) -> BTreeMap<K, Q> {
    values.into_iter().map(|(k, v)| (k, v.0)).collect()
}

/// `serde(with = ...)` adapter for a single `Q` field.
pub mod q_string {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Q, s: S) -> Result<S::Ok, S::Error> {
        Rat::from(value).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        Rat::deserialize(d).map(|r| r.0)
    }
}

/// `serde(with = ...)` adapter for `Vec<Q>`.
pub mod q_vec {
    use super::*;

    pub fn serialize<S: Serializer>(values: &[Q], s: S) -> Result<S::Ok, S::Error> {
        rats(values).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        Vec::<Rat>::deserialize(d).map(unrats)
    }
}

/// `serde(with = ...)` adapter for maps with rational values.
pub mod q_map {
    use super::*;

    pub fn serialize<K, S>(values: &BTreeMap<K, Q>, s: S) -> Result<S::Ok, S::Error>
    where
        K: Ord + Clone + Serialize,
        S: Serializer,
    {
        rat_map(values).serialize(s)
    }

    pub fn deserialize<'de, K, D>(d: D) -> Result<BTreeMap<K, Q>, D::Error>
    where
        K: Ord + Deserialize<'de>,
        D: Deserializer<'de>,
    {
        BTreeMap::<K, Rat>::deserialize(d).map(unrat_map)
    }
}
