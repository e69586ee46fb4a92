//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses a file of `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("{origin}:{}: expected `key = value`", n + 1))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(format!("{origin}:{}: empty key", n + 1));
            }
            if values.insert(key.to_string(), v.trim().to_string()).is_some() {
                return Err(format!("{origin}:{}: duplicate key `{key}`", n + 1));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
                Self::parse(&text, &p.display().to_string())
            }
        }
    }

    /// Applies `KEY=VALUE` strings from `--set`.
    pub fn apply(&mut self, overrides: &[String]) -> Result<(), String> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| format!("override `{o}` is not KEY=VALUE"))?;
            self.values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(())
    }

    /// Sets `key` from a flag when the flag was given.
    pub fn flag<T: Display>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    /// Removes and parses `key`.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: Display,
    {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| format!("bad value `{v}` for `{key}`: {e}")),
        }
    }

    /// Overwrites `slot` when `key` is present.
    pub fn update<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<(), String>
    where
        T::Err: Display,
    {
        if let Some(v) = self.take(key)? {
            *slot = v;
        }
        Ok(())
    }

    /// Comma-separated list.
    pub fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, String>
    where
        T::Err: Display,
    {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e| format!("bad entry `{s}` in `{key}`: {e}")))
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    /// Fails on any key nobody consumed.
    pub fn finish(self) -> Result<(), String> {
        if self.values.is_empty() {
            Ok(())
        } else {
            let keys: Vec<&str> = self.values.keys().map(String::as_str).collect();
            Err(format!("unknown configuration keys: {}", keys.join(", ")))
        }
    }
}
