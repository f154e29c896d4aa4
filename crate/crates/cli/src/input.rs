use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use guesslab::petri_net::{NetDocument, NetFile};

/// An input file that could not be parsed, with the position of the fault.
#[derive(Debug)]
pub struct Malformed {
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Malformed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "malformed input {}:{}:{}: {}",
            self.path, self.line, self.column, self.message
        )
    }
}

impl std::error::Error for Malformed {}

fn malformed(path: &Path, e: &serde_json::Error) -> anyhow::Error {
    Malformed {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e
            .to_string()
            .trim_end_matches(&format!(" at line {} column {}", e.line(), e.column()))
            .to_string(),
    }
    .into()
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| malformed(path, &e))
}

#[derive(Deserialize)]
struct WrappedNet {
    net: NetFile,
    #[serde(rename = "manifest")]
    _manifest: Option<Value>,
}

/// Reads a net file, either bare or as written by the refine and coarsen
/// verbs (wrapped under `"net"` next to a manifest).
pub fn read_net(path: &Path) -> Result<NetDocument> {
    let text = read_text(path)?;
    let file = match serde_json::from_str::<NetFile>(&text) {
        Ok(file) => file,
        Err(bare) => match serde_json::from_str::<WrappedNet>(&text) {
            Ok(w) => w.net,
            Err(_) => return Err(malformed(path, &bare)),
        },
    };
    NetDocument::from_file(file).map_err(|e| anyhow!("invalid net {}: {e}", path.display()))
}

/// Parses `key=value` pairs. Values are read as JSON when they parse as
/// JSON and taken as strings otherwise.
pub fn parse_overrides(pairs: &[String]) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let Some((key, value)) = pair.split_once('=') else {
            bail!("override {pair:?} is not of the form key=value");
        };
        if key.is_empty() {
            bail!("override {pair:?} has an empty key");
        }
        out.insert(key.to_string(), value.to_string());
    }
    Ok(out)
}

/// Applies overrides to a JSON config. Dotted keys address nested fields.
pub fn apply_overrides(config: &mut Value, overrides: &BTreeMap<String, String>) -> Result<()> {
    for (key, raw) in overrides {
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
        let mut slot = &mut *config;
        for part in key.split('.') {
            let Value::Object(map) = slot else {
                bail!("override {key:?} does not address a field");
            };
            slot = map.entry(part.to_string()).or_insert(Value::Null);
        }
        *slot = value;
    }
    Ok(())
}

pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| anyhow!("{what}: {s:?} is not a valid number"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_reach_nested_fields() {
        let mut cfg = json!({"harness": {"theta_bits": 12}, "seed": 1});
        let o = parse_overrides(&["harness.theta_bits=10".into(), "label=abc".into()]).unwrap();
        apply_overrides(&mut cfg, &o).unwrap();
        assert_eq!(cfg, json!({"harness": {"theta_bits": 10}, "seed": 1, "label": "abc"}));
        assert!(parse_overrides(&["nokey".into()]).is_err());
        assert!(apply_overrides(&mut cfg, &parse_overrides(&["seed.x=1".into()]).unwrap()).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<f64>("0.2, 0.1", "eps").unwrap(), vec![0.2, 0.1]);
        assert!(parse_list::<u64>("1,x", "k").is_err());
    }
}
