//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names without the leading dashes (`game`, `size`,
//! `record-every`, ...). Lists are comma separated, booleans are `true` or
//! `false`, and `#` starts a comment. Flags given on the command line win
//! over values from the file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Keys accepted in a configuration file.
pub const KNOWN_KEYS: &[&str] = &[
    "game",
    "size",
    "matrix",
    "seed",
    "seeds",
    "eta",
    "steps",
    "shots",
    "exact",
    "layers",
    "box",
    "record-every",
    "out",
    "out-dir",
    "verify",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("config line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().trim_start_matches("--");
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Usage(format!("config line {}: unknown key `{key}`", lineno + 1)));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|v| parse_value(key, v)).transpose()
    }

    pub fn get_list<T>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_value(key, s)).collect())
            .transpose()
    }
}

fn parse_value<T>(key: &str, v: &str) -> Result<T>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| Error::Usage(format!("config key `{key}`: invalid value `{v}`: {e}")))
}

/// Flag value if given, else the file value, else `None`.
pub fn pick<T>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

pub fn pick_list<T>(flag: Option<Vec<T>>, file: &ConfigFile, key: &str) -> Result<Option<Vec<T>>>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) if !v.is_empty() => Ok(Some(v)),
        _ => file.get_list(key),
    }
}

/// A boolean switch: set by the flag, or by `key = true` in the file.
pub fn pick_switch(flag: bool, file: &ConfigFile, key: &str) -> Result<bool> {
    Ok(flag || file.get::<bool>(key)?.unwrap_or(false))
}

/// Renders a resolved configuration in the file format.
pub fn render(values: &BTreeMap<String, String>) -> String {
    values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let cfg =
            ConfigFile::parse("# sweep\ngame = dominant,pennies\nsize=4, 8\n--eta = 0.05 # inline\nexact = true\n")
                .unwrap();
        assert_eq!(cfg.get_list::<String>("game").unwrap().unwrap(), vec!["dominant", "pennies"]);
        assert_eq!(cfg.get_list::<usize>("size").unwrap().unwrap(), vec![4, 8]);
        assert_eq!(cfg.get::<f64>("eta").unwrap(), Some(0.05));
        assert_eq!(cfg.get::<usize>("steps").unwrap(), None);
        assert!(pick_switch(false, &cfg, "exact").unwrap());
        assert!(!pick_switch(false, &cfg, "verify").unwrap());
    }

    #[test]
    fn flags_win() {
        let cfg = ConfigFile::parse("steps = 10").unwrap();
        assert_eq!(pick(Some(99usize), &cfg, "steps").unwrap(), Some(99));
        assert_eq!(pick(None::<usize>, &cfg, "steps").unwrap(), Some(10));
        assert_eq!(pick_list(Some(vec![1usize]), &cfg, "size").unwrap(), Some(vec![1]));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigFile::parse("steps 10").is_err());
        assert!(ConfigFile::parse("colour = red").is_err());
        let cfg = ConfigFile::parse("steps = ten").unwrap();
        assert!(cfg.get::<usize>("steps").is_err());
    }

    #[test]
    fn render_round_trips() {
        let mut m = BTreeMap::new();
        m.insert("eta".to_string(), 0.1f64.to_string());
        m.insert("game".to_string(), "random".to_string());
        let cfg = ConfigFile::parse(&render(&m)).unwrap();
        assert_eq!(cfg.get::<f64>("eta").unwrap(), Some(0.1));
        assert_eq!(cfg.raw("game"), Some("random"));
    }
}
