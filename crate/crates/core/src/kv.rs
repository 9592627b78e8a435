//! `key=value` configuration files.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum KvError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("config key {0:?} given twice")]
    Duplicate(String),
    #[error("unknown config key {0:?}")]
    Unknown(String),
    #[error("config key {key:?}: invalid value {value:?}")]
    Invalid { key: String, value: String },
}

/// Parsed `key=value` pairs. Blank lines and `#` comments are ignored.
#[derive(Debug, Default, Clone)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(KvError::Syntax { line: i + 1 })?;
            let k = k.trim().to_owned();
            if entries.insert(k.clone(), v.trim().to_owned()).is_some() {
                return Err(KvError::Duplicate(k));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, KvError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_owned(), value.into());
    }

    /// Fails on the first key not in `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<(), KvError> {
        match self.entries.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(KvError::Unknown(k.clone())),
            None => Ok(()),
        }
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, KvError> {
        self.entries
            .get(key)
            .map(|v| v.parse().map_err(|_| KvError::Invalid { key: key.to_owned(), value: v.clone() }))
            .transpose()
    }

    /// A comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, KvError> {
        self.entries
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|_| KvError::Invalid { key: key.to_owned(), value: v.clone() }))
                    .collect()
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_and_lists() {
        let kv = KeyValues::parse("# c\npageSize = 100\nmaxMpR=5,10, 15\n\n").unwrap();
        assert_eq!(kv.get::<usize>("pageSize").unwrap(), Some(100));
        assert_eq!(kv.get_list::<usize>("maxMpR").unwrap(), Some(vec![5, 10, 15]));
        assert_eq!(kv.get::<usize>("absent").unwrap(), None);
        assert!(kv.check_known(&["pageSize"]).is_err());
        assert!(kv.check_known(&["pageSize", "maxMpR"]).is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(KeyValues::parse("novalue"), Err(KvError::Syntax { line: 1 })));
        assert!(matches!(KeyValues::parse("a=1\na=2"), Err(KvError::Duplicate(_))));
        let kv = KeyValues::parse("a=x").unwrap();
        assert!(kv.get::<u32>("a").is_err());
    }
}
