//! Flat `key = value` run files with `[section]` headers.
//!
//! ```text
//! # comment
//! [scenario]
//! name = case3
//! seedmesh = conforming
//! n = 4
//! [study]
//! degree = 2
//! levels = 6
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<(String, String), (String, usize)>,
    path: std::path::PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = RunConfig {
            entries: BTreeMap::new(),
            path: path.to_path_buf(),
        };
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated section header '{line}'")))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(err("empty key".into()));
            }
            if cfg
                .entries
                .insert((section.clone(), key.to_string()), (value.trim().to_string(), i + 1))
                .is_some()
            {
                return Err(err(format!("duplicate key '{key}' in section [{section}]")));
            }
        }
        Ok(cfg)
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|(v, _)| v.as_str())
    }

    /// Typed lookup; a present but malformed value is an error.
    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let Some((value, line)) = self.entries.get(&(section.to_string(), key.to_string())) else {
            return Ok(None);
        };
        value.parse().map(Some).map_err(|e: T::Err| Error::Parse {
            path: self.path.clone(),
            line: *line,
            message: format!("[{section}] {key} = '{value}': {e}"),
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.keys().map(|(s, k)| (s.as_str(), k.as_str()))
    }
}
