use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Parses flat `key = value` text: one pair per line, `#` comments, blank
/// lines ignored. Keys are lowercased; duplicate keys keep the last value.
pub fn parse_flat_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(idx) => &raw[..idx],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim().to_ascii_lowercase();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

pub fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let raw = map
        .get(key)
        .ok_or_else(|| Error::Config(format!("missing key `{key}`")))?;
    raw.parse()
        .map_err(|_| Error::Config(format!("key `{key}`: `{raw}` is not a number")))
}

pub fn get_f64_or(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|_| Error::Config(format!("key `{key}`: `{raw}` is not a number"))),
    }
}

pub fn get_list_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Vec<f64>> {
    let raw = map
        .get(key)
        .ok_or_else(|| Error::Config(format!("missing key `{key}`")))?;
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("key `{key}`: `{s}` is not a number")))
        })
        .collect()
}
