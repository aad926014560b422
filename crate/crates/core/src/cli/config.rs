//! Flat `key = value` configuration with `[section]` headers.
//!
//! Lines starting with `#` or `;` are comments. Keys that appear before the
//! first header belong to the unnamed section `""`. Lists are comma-separated.

use std::collections::BTreeMap;
use std::path::Path;

use super::CliError;

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

/// Parsed configuration. Values are consumed by the command that owns them;
/// anything left over when [`RunConfig::finish`] is called is an unknown key.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
    echo: BTreeMap<String, BTreeMap<String, String>>,
}

fn err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("line {line_no}: unterminated section header")))?
                    .trim();
                if name.is_empty() || name.contains(['[', ']', '=']) {
                    return Err(err(format!("line {line_no}: bad section name '{name}'")));
                }
                section = name.to_string();
                cfg.sections.entry(section.clone()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {line_no}: expected 'key = value'")))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(err(format!("line {line_no}: bad key '{key}'")));
            }
            let entries = cfg.sections.entry(section.clone()).or_default();
            if entries.contains_key(key) {
                return Err(err(format!("line {line_no}: duplicate key '{}'", qualified(&section, key))));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    line: line_no,
                    value: value.to_string(),
                },
            );
            cfg.echo
                .entry(section.clone())
                .or_default()
                .insert(key.to_string(), value.to_string());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    /// Every key/value as written, for the metadata record.
    pub fn echo(&self) -> &BTreeMap<String, BTreeMap<String, String>> {
        &self.echo
    }

    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.sections.get_mut(section).and_then(|s| s.remove(key))
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.sections.get(section).is_some_and(|s| s.contains_key(key))
    }

    pub fn string(&mut self, section: &str, key: &str) -> Option<String> {
        self.take(section, key).map(|e| e.value)
    }

    pub fn f64_opt(&mut self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        match self.take(section, key) {
            None => Ok(None),
            Some(e) => parse_f64(&e.value)
                .map(Some)
                .ok_or_else(|| bad_value(section, key, &e, "a finite number")),
        }
    }

    pub fn f64_or(&mut self, section: &str, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64_opt(section, key)?.unwrap_or(default))
    }

    pub fn f64_req(&mut self, section: &str, key: &str) -> Result<f64, CliError> {
        self.f64_opt(section, key)?
            .ok_or_else(|| err(format!("missing required key '{}'", qualified(section, key))))
    }

    pub fn usize_or(&mut self, section: &str, key: &str, default: usize) -> Result<usize, CliError> {
        match self.take(section, key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse()
                .map_err(|_| bad_value(section, key, &e, "a non-negative integer")),
        }
    }

    pub fn list_opt(&mut self, section: &str, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(e) = self.take(section, key) else {
            return Ok(None);
        };
        if e.value.is_empty() {
            return Ok(Some(Vec::new()));
        }
        e.value
            .split(',')
            .map(|item| parse_f64(item.trim()))
            .collect::<Option<Vec<f64>>>()
            .map(Some)
            .ok_or_else(|| bad_value(section, key, &e, "a comma-separated list of finite numbers"))
    }

    pub fn list_req(&mut self, section: &str, key: &str) -> Result<Vec<f64>, CliError> {
        self.list_opt(section, key)?
            .ok_or_else(|| err(format!("missing required key '{}'", qualified(section, key))))
    }

    /// Rejects any key no command consumed.
    pub fn finish(&self) -> Result<(), CliError> {
        let mut unknown: Vec<(usize, String)> = self
            .sections
            .iter()
            .flat_map(|(s, keys)| keys.iter().map(move |(k, e)| (e.line, qualified(s, k))))
            .collect();
        unknown.sort();
        match unknown.first() {
            None => Ok(()),
            Some((line, key)) => Err(err(format!("line {line}: unknown key '{key}'"))),
        }
    }
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn bad_value(section: &str, key: &str, e: &Entry, want: &str) -> CliError {
    err(format!(
        "line {}: '{}' = '{}' is not {want}",
        e.line,
        qualified(section, key),
        e.value
    ))
}
