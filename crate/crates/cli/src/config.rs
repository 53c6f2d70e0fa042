//! Run configuration: a TOML file with one table per stage, plus
//! `--section.key=value` command-line overrides.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
#[error("invalid configuration key {key}: {message}")]
pub struct ValidationError {
    pub key: String,
    pub message: String,
}

fn invalid(key: &str, message: impl Into<String>) -> ValidationError {
    ValidationError {
        key: key.to_string(),
        message: message.into(),
    }
}

pub struct Config {
    table: Table,
    /// Directory that relative paths in the file are resolved against.
    base_dir: PathBuf,
    /// Keys set on the command line; their paths resolve against the
    /// working directory instead.
    overridden: BTreeSet<String>,
    used: RefCell<BTreeMap<String, String>>,
}

impl Config {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ValidationError> {
        let (mut table, base_dir) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| invalid("config", format!("cannot read {}: {e}", p.display())))?;
                let table: Table = toml::from_str(&text).map_err(|e| invalid("config", e.to_string()))?;
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (table, dir)
            }
            None => (Table::new(), PathBuf::new()),
        };
        let mut overridden = BTreeSet::new();
        for raw in overrides {
            let (key, value) = raw
                .strip_prefix("--")
                .and_then(|kv| kv.split_once('='))
                .ok_or_else(|| invalid(raw, "overrides take the form --section.key=value"))?;
            if key == "config" {
                return Err(invalid(key, "pass --config before any overrides"));
            }
            let (section, name) = key.split_once('.').unwrap_or(("general", key));
            overridden.insert(format!("{section}.{name}"));
            let value = parse_override(value);
            let slot = table
                .entry(section.to_string())
                .or_insert_with(|| Value::Table(Table::new()));
            match slot {
                Value::Table(t) => {
                    t.insert(name.to_string(), value);
                }
                _ => return Err(invalid(section, "is not a section")),
            }
        }
        Ok(Config {
            table,
            base_dir,
            overridden,
            used: RefCell::new(BTreeMap::new()),
        })
    }

    /// Every key read so far with its effective value.
    pub fn used_parameters(&self) -> BTreeMap<String, String> {
        self.used.borrow().clone()
    }

    fn lookup(&self, key: &str) -> Option<&Value> {
        let (section, name) = key.split_once('.').expect("keys are section.name");
        self.table.get(section)?.as_table()?.get(name)
    }

    fn record(&self, key: &str, value: impl Display) {
        self.used.borrow_mut().insert(key.to_string(), value.to_string());
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<String>, ValidationError> {
        let value = match self.lookup(key) {
            None => return Ok(None),
            Some(Value::String(s)) => s.clone(),
            Some(Value::Integer(i)) => i.to_string(),
            Some(Value::Float(f)) => f.to_string(),
            Some(Value::Boolean(b)) => b.to_string(),
            Some(_) => return Err(invalid(key, "expected a scalar")),
        };
        self.record(key, &value);
        Ok(Some(value))
    }

    pub fn str_or(&self, key: &str, default: &str) -> Result<String, ValidationError> {
        match self.opt_str(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, default);
                Ok(default.to_string())
            }
        }
    }

    /// Parses a scalar with `FromStr`, falling back to `default`.
    pub fn parse_or<T>(&self, key: &str, default: T) -> Result<T, ValidationError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.opt_str(key)? {
            Some(v) => v.parse().map_err(|e| invalid(key, format!("{v:?}: {e}"))),
            None => {
                self.record(key, &default);
                Ok(default)
            }
        }
    }

    pub fn usize_in(&self, key: &str, default: usize, min: usize, max: usize) -> Result<usize, ValidationError> {
        let v: usize = self.parse_or(key, default)?;
        if v < min || v > max {
            return Err(invalid(key, format!("{v} outside [{min}, {max}]")));
        }
        Ok(v)
    }

    pub fn f64_in(&self, key: &str, default: f64, min: f64, max: f64) -> Result<f64, ValidationError> {
        let v: f64 = self.parse_or(key, default)?;
        if !(v >= min && v <= max) {
            return Err(invalid(key, format!("{v} outside [{min}, {max}]")));
        }
        Ok(v)
    }

    /// A list given either as a TOML array or a comma-separated string.
    pub fn opt_list(&self, key: &str) -> Result<Option<Vec<String>>, ValidationError> {
        let items = match self.lookup(key) {
            None => return Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.clone()),
                    Value::Integer(i) => Ok(i.to_string()),
                    _ => Err(invalid(key, "list items must be strings or integers")),
                })
                .collect::<Result<Vec<_>, _>>()?,
            Some(Value::String(s)) => s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect(),
            Some(Value::Integer(i)) => vec![i.to_string()],
            Some(_) => return Err(invalid(key, "expected a list")),
        };
        self.record(key, items.join(","));
        Ok(Some(items))
    }

    fn resolve(&self, key: &str, raw: &str) -> PathBuf {
        let p = PathBuf::from(raw);
        if p.is_absolute() || self.overridden.contains(key) {
            p
        } else {
            self.base_dir.join(p)
        }
    }

    /// An input path that must exist.
    pub fn input_path(&self, key: &str) -> Result<PathBuf, ValidationError> {
        let raw = self.opt_str(key)?.ok_or_else(|| invalid(key, "required"))?;
        let p = self.resolve(key, &raw);
        if !p.exists() {
            return Err(invalid(key, format!("{} does not exist", p.display())));
        }
        Ok(p)
    }

    pub fn opt_input_path(&self, key: &str) -> Result<Option<PathBuf>, ValidationError> {
        match self.lookup(key) {
            None => Ok(None),
            Some(_) => self.input_path(key).map(Some),
        }
    }

    /// Input path defaulting to `default` (already resolved), which must exist.
    pub fn input_path_or(&self, key: &str, default: &Path) -> Result<PathBuf, ValidationError> {
        match self.lookup(key) {
            Some(_) => self.input_path(key),
            None => {
                self.record(key, default.display());
                if default.exists() {
                    Ok(default.to_path_buf())
                } else {
                    Err(invalid(key, format!("{} does not exist", default.display())))
                }
            }
        }
    }

    pub fn output_dir(&self) -> Result<PathBuf, ValidationError> {
        let raw = self.str_or("general.output_dir", "out")?;
        Ok(self.resolve("general.output_dir", &raw))
    }
}

fn parse_override(raw: &str) -> Value {
    let raw = raw.trim();
    if let Ok(i) = raw.parse::<i64>() {
        return Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return Value::Float(f);
    }
    match raw {
        "true" => Value::Boolean(true),
        "false" => Value::Boolean(false),
        _ => Value::String(raw.to_string()),
    }
}
