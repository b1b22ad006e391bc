//! Flat `key = value` parameter files.
//!
//! One entry per line; `#` starts a comment; lists are comma separated.
//! Every key in a file must be consumed by the command reading it.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct ParamFile {
    path: PathBuf,
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl ParamFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::format(path, format!("line {}: expected key = value", no + 1)))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(CliError::format(path, format!("line {}: empty key", no + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::format(path, format!("line {}: duplicate key '{key}'", no + 1)));
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
            used: RefCell::default(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(String::as_str)
    }

    fn parse_value<T: FromStr>(&self, key: &str, v: &str) -> Result<T, CliError> {
        v.parse()
            .map_err(|_| CliError::format(&self.path, format!("cannot parse '{v}' for key '{key}'")))
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.raw(key) {
            Some(v) => self.parse_value(key, v),
            None => Ok(default),
        }
    }

    pub fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>, CliError> {
        match self.raw(key) {
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| self.parse_value(key, s))
                .collect(),
            None => Ok(default),
        }
    }

    /// Rejects keys that no getter asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::format(&self.path, format!("unknown keys: {}", unknown.join(", "))))
        }
    }
}
