//! Flat `key = value` experiment configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Parses `key = value` lines. `#` starts a comment; blank lines are
    /// skipped; repeated keys are an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{}`", no + 1, raw.trim()))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                bail!("line {}: empty key", no + 1);
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                bail!("line {}: key `{k}` given twice", no + 1);
            }
        }
        Ok(Config { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn with(mut self, key: &str, value: impl Display) -> Self {
        self.set(key, value);
        self
    }
}

/// Resolves typed parameters against a config, remembering every value
/// (defaults included) so the full configuration can be written out.
pub struct Params<'a> {
    config: &'a Config,
    used: BTreeSet<String>,
    resolved: Vec<(String, String)>,
}

impl<'a> Params<'a> {
    pub fn new(config: &'a Config) -> Self {
        Params { config, used: BTreeSet::new(), resolved: Vec::new() }
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match self.config.entries.get(key) {
            Some(raw) => raw.parse::<T>().map_err(|e| anyhow!("bad value `{raw}` for `{key}`: {e}"))?,
            None => default,
        };
        self.used.insert(key.to_string());
        self.resolved.push((key.to_string(), value.to_string()));
        Ok(value)
    }

    /// Comma-separated list.
    pub fn list<T>(&mut self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        let values = match self.config.entries.get(key) {
            Some(raw) => raw
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<T>().map_err(|e| anyhow!("bad list item `{s}` for `{key}`: {e}")))
                .collect::<Result<Vec<_>>>()?,
            None => default.to_vec(),
        };
        self.used.insert(key.to_string());
        let text = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
        self.resolved.push((key.to_string(), text));
        Ok(values)
    }

    /// Rejects keys that no parameter asked for.
    pub fn finish(self) -> Result<Resolved> {
        let unknown: Vec<&str> =
            self.config.entries.keys().filter(|k| !self.used.contains(*k)).map(|k| k.as_str()).collect();
        if !unknown.is_empty() {
            bail!("unknown config key(s): {}", unknown.join(", "));
        }
        Ok(Resolved { entries: self.resolved })
    }
}

/// Fully resolved parameters in the order they were requested.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub entries: Vec<(String, String)>,
}

impl Resolved {
    pub fn to_text(&self, subcommand: &str) -> String {
        let mut s = format!("# recon {subcommand}\n");
        for (k, v) in &self.entries {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}
