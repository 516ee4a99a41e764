//! `key = value` configuration files.
//!
//! One setting per line. `#` starts a comment, blank lines are ignored, keys
//! are the long flag names without the leading dashes (`spot`, `put-strike`).

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    MissingEquals { line: usize },
    #[error("line {line}: empty key")]
    EmptyKey { line: usize },
    #[error("line {line}: invalid key {key:?}")]
    InvalidKey { line: usize, key: String },
    #[error("line {line}: empty value for {key:?}")]
    EmptyValue { line: usize, key: String },
    #[error("line {line}: {key:?} already set on line {first}")]
    Duplicate {
        line: usize,
        key: String,
        first: usize,
    },
}

/// A parsed configuration file; each entry remembers its line number.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, (String, usize)>,
}

impl Config {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(_, l)| *l)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn valid_key(key: &str) -> bool {
    key.bytes()
        .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' || b == b'_')
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut config = Config::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ConfigError::MissingEquals { line: line_no })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::EmptyKey { line: line_no });
        }
        if !valid_key(key) {
            return Err(ConfigError::InvalidKey {
                line: line_no,
                key: key.to_string(),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::EmptyValue {
                line: line_no,
                key: key.to_string(),
            });
        }
        if let Some((_, first)) = config.entries.get(key) {
            return Err(ConfigError::Duplicate {
                line: line_no,
                key: key.to_string(),
                first: *first,
            });
        }
        config
            .entries
            .insert(key.to_string(), (value.to_string(), line_no));
    }
    Ok(config)
}
