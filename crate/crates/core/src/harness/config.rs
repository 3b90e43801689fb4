use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::error::{Error, Result};

/// `key = value` configuration with `[section]` headers. Every lookup records
/// the value it resolved to (given or default) so the run can echo it.
#[derive(Debug)]
pub struct Config {
    ini: Ini,
    resolved: RefCell<BTreeMap<String, BTreeMap<String, String>>>,
}

impl Default for Config {
    fn default() -> Self {
        Config { ini: Ini::new(), resolved: RefCell::default() }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Config { ini, resolved: RefCell::default() })
    }

    /// Override (or add) a value, e.g. from the command line.
    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        self.ini.with_section(Some(section)).set(key, value.into());
    }

    fn raw(&self, section: &str, key: &str) -> Option<String> {
        self.ini.section(Some(section)).and_then(|s| s.get(key)).map(|v| v.trim().to_string())
    }

    fn record(&self, section: &str, key: &str, value: &str) {
        self.resolved.borrow_mut().entry(section.into()).or_default().insert(key.into(), value.into());
    }

    pub fn get<T: FromStr + ToString>(&self, section: &str, key: &str, default: T) -> Result<T> {
        let v = match self.raw(section, key) {
            Some(s) => s
                .parse::<T>()
                .map_err(|_| Error::Config(format!("[{section}] {key} = {s:?} does not parse")))?,
            None => default,
        };
        self.record(section, key, &v.to_string());
        Ok(v)
    }

    pub fn get_str(&self, section: &str, key: &str, default: &str) -> String {
        let v = self.raw(section, key).unwrap_or_else(|| default.to_string());
        self.record(section, key, &v);
        v
    }

    /// Comma-separated list of reals.
    pub fn get_list(&self, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = match self.raw(section, key) {
            Some(s) => s
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Config(format!("[{section}] {key} = {s:?} is not a list of numbers")))?,
            None => default.to_vec(),
        };
        let text: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        self.record(section, key, &text.join(", "));
        Ok(v)
    }

    /// The resolved configuration in the input format, followed by any keys
    /// that were given but never read.
    pub fn manifest(&self) -> String {
        let resolved = self.resolved.borrow();
        let mut s = String::new();
        for (sec, kv) in resolved.iter() {
            let _ = writeln!(s, "[{sec}]");
            for (k, v) in kv {
                let _ = writeln!(s, "{k} = {v}");
            }
            s.push('\n');
        }
        let mut unused = Vec::new();
        for (sec, props) in self.ini.iter() {
            let sec = sec.unwrap_or("");
            for (k, v) in props.iter() {
                if !resolved.get(sec).is_some_and(|m| m.contains_key(k)) {
                    unused.push(format!("# unused: [{sec}] {k} = {v}"));
                }
            }
        }
        for u in unused {
            let _ = writeln!(s, "{u}");
        }
        s
    }
}
