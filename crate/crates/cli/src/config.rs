//! Optional settings file of `key = value` lines.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default)]
pub struct Settings {
    values: HashMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Settings, String> {
        let Some(path) = path else { return Ok(Settings::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Settings::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// `#` starts a comment; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Settings, String> {
        let mut values = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Settings { values })
    }

    /// The flag if given, else the file's value for `key`, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(s) => s.parse().map_err(|e| format!("setting {key} = {s}: {e}")),
            None => Ok(default),
        }
    }

    /// Like [`Settings::pick`] for settings without a default.
    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.values.get(key).map(|s| s.parse().map_err(|e| format!("setting {key} = {s}: {e}"))).transpose(),
        }
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, String> {
        Ok(flag || self.pick(None, key, false)?)
    }
}
