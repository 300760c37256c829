//! Optional TOML defaults. Any long flag can be preset by a key of the same
//! name (arrays for repeatable flags); values given on the command line win.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

pub struct Overlay {
    table: toml::Table,
}

fn scalar_text(value: &toml::Value, key: &str) -> Result<String, CliError> {
    match value {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(x) => Ok(x.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        other => Err(CliError::Usage(format!(
            "config key '{key}': expected a scalar value, got {}",
            other.type_str()
        ))),
    }
}

impl Overlay {
    pub fn empty() -> Self {
        Overlay {
            table: toml::Table::new(),
        }
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::empty());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?;
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?;
        Ok(Overlay { table })
    }

    fn parse_as<T>(text: &str, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        text.parse::<T>()
            .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
    }

    /// Flag value if given, else the config value, else None.
    pub fn opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(value) => Ok(Some(Self::parse_as(&scalar_text(value, key)?, key)?)),
        }
    }

    /// Flag value if given, else the config value, else the default.
    pub fn get<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    /// True when the switch was passed or the config sets the key to true.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        Ok(self.opt::<bool>(None, key)?.unwrap_or(false))
    }

    /// Repeatable flag: command-line occurrences win wholesale; a config
    /// array (or single scalar) fills in otherwise.
    pub fn list<T>(&self, flags: Vec<T>, key: &str) -> Result<Vec<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if !flags.is_empty() {
            return Ok(flags);
        }
        match self.table.get(key) {
            None => Ok(Vec::new()),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|item| Self::parse_as(&scalar_text(item, key)?, key))
                .collect(),
            Some(value) => Ok(vec![Self::parse_as(&scalar_text(value, key)?, key)?]),
        }
    }
}
