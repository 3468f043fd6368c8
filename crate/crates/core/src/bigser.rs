//! Serde helpers writing arbitrary-precision integers as decimal strings.

use std::str::FromStr;

use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

pub fn serialize<T: ToString, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_string())
}

pub fn deserialize<'de, T: FromStr, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
    let text = String::deserialize(d)?;
    text.parse()
        .map_err(|_| D::Error::custom(format!("'{text}' is not a decimal integer")))
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<T: ToString, S: Serializer>(values: &[T], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&v.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, T: FromStr, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .into_iter()
            .map(|t| {
                t.parse()
                    .map_err(|_| D::Error::custom(format!("'{t}' is not a decimal integer")))
            })
            .collect()
    }
}

pub mod opt_vec {
    use super::*;

    pub fn serialize<T: ToString, S: Serializer>(values: &Option<Vec<T>>, s: S) -> Result<S::Ok, S::Error> {
        match values {
            Some(v) => super::vec::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, T: FromStr, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<T>>, D::Error> {
        let texts = Option::<Vec<String>>::deserialize(d)?;
        texts
            .map(|v| {
                v.into_iter()
                    .map(|t| {
                        t.parse()
                            .map_err(|_| D::Error::custom(format!("'{t}' is not a decimal integer")))
                    })
                    .collect()
            })
            .transpose()
    }
}
