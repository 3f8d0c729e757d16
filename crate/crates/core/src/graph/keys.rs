//! Serde helpers for maps keyed by [`VertexId`]: text formats such as TOML
//! only allow string keys.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::base::VertexId;

pub fn serialize<V: Serialize, S: Serializer>(map: &BTreeMap<VertexId, V>, s: S) -> Result<S::Ok, S::Error> {
    map.iter().map(|(k, v)| (k.0.to_string(), v)).collect::<BTreeMap<_, _>>().serialize(s)
}

pub fn deserialize<'de, V: Deserialize<'de>, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<VertexId, V>, D::Error> {
    let raw = BTreeMap::<String, V>::deserialize(d)?;
    raw.into_iter()
        .map(|(k, v)| k.parse::<u32>().map(|k| (VertexId(k), v)).map_err(|_| D::Error::custom(format!("bad vertex key {k:?}"))))
        .collect()
}

pub mod option {
    use super::*;

    pub fn serialize<V: Serialize, S: Serializer>(map: &Option<BTreeMap<VertexId, V>>, s: S) -> Result<S::Ok, S::Error> {
        match map {
            Some(m) => s.serialize_some(&m.iter().map(|(k, v)| (k.0.to_string(), v)).collect::<BTreeMap<_, _>>()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, V: Deserialize<'de>, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Option<BTreeMap<VertexId, V>>, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "V: Deserialize<'de>")]
        struct Wrap<V>(#[serde(deserialize_with = "super::deserialize")] BTreeMap<VertexId, V>);
        Ok(Option::<Wrap<V>>::deserialize(d)?.map(|w| w.0))
    }
}
