//! Flat INI-style configuration files: `[section]` headers, `key = value`
//! pairs, `#` or `;` comments. Unknown sections or keys are hard errors so
//! typos fail loudly; every error carries its line number.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ConfigValue {
    pub value: String,
    pub line: usize,
}

/// Parsed configuration: section name → key → (value, line).
#[derive(Debug, Clone, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, ConfigValue>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(stripped) = line.strip_prefix('[') {
                let name = stripped.strip_suffix(']').ok_or_else(|| {
                    Error::invalid(format!("line {line_no}: unterminated section header"))
                })?;
                let name = name.trim().to_lowercase();
                if name.is_empty() {
                    return Err(Error::invalid(format!("line {line_no}: empty section name")));
                }
                if cfg.sections.contains_key(&name) {
                    return Err(Error::invalid(format!(
                        "line {line_no}: duplicate section [{name}]"
                    )));
                }
                cfg.sections.insert(name.clone(), BTreeMap::new());
                current = name;
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::invalid(format!("line {line_no}: expected `key = value`, got {line:?}"))
            })?;
            let key = key.trim().to_lowercase();
            if key.is_empty() {
                return Err(Error::invalid(format!("line {line_no}: empty key")));
            }
            if current.is_empty() {
                return Err(Error::invalid(format!(
                    "line {line_no}: `{key}` appears before any [section]"
                )));
            }
            let section = cfg.sections.get_mut(&current).expect("current exists");
            if section.contains_key(&key) {
                return Err(Error::invalid(format!(
                    "line {line_no}: duplicate key `{key}` in [{current}]"
                )));
            }
            section.insert(
                key,
                ConfigValue {
                    value: value.trim().to_string(),
                    line: line_no,
                },
            );
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {path:?}: {e}")))?;
        Config::parse(&text)
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    pub fn section_names(&self) -> Vec<&str> {
        self.sections.keys().map(|s| s.as_str()).collect()
    }

    pub fn section<'a>(&'a self, name: &'a str) -> Result<Section<'a>> {
        let entries = self
            .sections
            .get(name)
            .ok_or_else(|| Error::invalid(format!("missing required section [{name}]")))?;
        Ok(Section { name, entries })
    }

    /// Reject any section not in the allowed list.
    pub fn check_sections(&self, allowed: &[&str]) -> Result<()> {
        for name in self.sections.keys() {
            if !allowed.contains(&name.as_str()) {
                return Err(Error::invalid(format!(
                    "unknown section [{name}]; expected one of {allowed:?}"
                )));
            }
        }
        Ok(())
    }
}

pub struct Section<'a> {
    name: &'a str,
    entries: &'a BTreeMap<String, ConfigValue>,
}

impl<'a> Section<'a> {
    /// Reject any key not in the allowed list.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (key, v) in self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::invalid(format!(
                    "line {}: unknown key `{key}` in [{}]; expected one of {allowed:?}",
                    v.line, self.name
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|v| v.value.as_str())
    }

    fn raw(&self, key: &str) -> Result<&ConfigValue> {
        self.entries.get(key).ok_or_else(|| {
            Error::invalid(format!("missing key `{key}` in [{}]", self.name))
        })
    }

    pub fn str_required(&self, key: &str) -> Result<&str> {
        Ok(self.raw(key)?.value.as_str())
    }

    pub fn f64_required(&self, key: &str) -> Result<f64> {
        let v = self.raw(key)?;
        v.value.parse().map_err(|_| {
            Error::invalid(format!(
                "line {}: `{key}` must be a number, got {:?}",
                v.line, v.value
            ))
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(_) => self.f64_required(key),
        }
    }

    pub fn usize_required(&self, key: &str) -> Result<usize> {
        let v = self.raw(key)?;
        v.value.parse().map_err(|_| {
            Error::invalid(format!(
                "line {}: `{key}` must be a nonnegative integer, got {:?}",
                v.line, v.value
            ))
        })
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(_) => self.usize_required(key),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v.value.parse().map_err(|_| {
                Error::invalid(format!(
                    "line {}: `{key}` must be a nonnegative integer, got {:?}",
                    v.line, v.value
                ))
            }),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => match v.value.to_lowercase().as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => Err(Error::invalid(format!(
                    "line {}: `{key}` must be true/false, got {other:?}",
                    v.line
                ))),
            },
        }
    }

    /// Comma-separated f64 list.
    pub fn f64_list_required(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.raw(key)?;
        v.value
            .split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    Error::invalid(format!(
                        "line {}: `{key}` must be a comma-separated number list",
                        v.line
                    ))
                })
            })
            .collect()
    }

    /// Comma-separated usize list.
    pub fn usize_list_required(&self, key: &str) -> Result<Vec<usize>> {
        let v = self.raw(key)?;
        v.value
            .split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    Error::invalid(format!(
                        "line {}: `{key}` must be a comma-separated integer list",
                        v.line
                    ))
                })
            })
            .collect()
    }

    /// Comma-separated lowercase string list.
    pub fn str_list_required(&self, key: &str) -> Result<Vec<String>> {
        Ok(self
            .raw(key)?
            .value
            .split(',')
            .map(|s| s.trim().to_lowercase())
            .filter(|s| !s.is_empty())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_values() {
        let cfg = Config::parse("# demo\n[kernel]\nfamily = ch\nnu = 0.5\n\n[fit]\nn_starts=3\n")
            .unwrap();
        let k = cfg.section("kernel").unwrap();
        assert_eq!(k.str_required("family").unwrap(), "ch");
        assert_eq!(k.f64_required("nu").unwrap(), 0.5);
        assert_eq!(cfg.section("fit").unwrap().usize_or("n_starts", 1).unwrap(), 3);
    }

    #[test]
    fn rejects_unknown_keys_with_line_numbers() {
        let cfg = Config::parse("[kernel]\nfamily = ch\nmisspelt = 1\n").unwrap();
        let err = cfg
            .section("kernel")
            .unwrap()
            .check_keys(&["family", "nu"])
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("misspelt"), "{msg}");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Config::parse("[a]\nno_equals_sign\n").is_err());
        assert!(Config::parse("key = 1\n").is_err());
        assert!(Config::parse("[a]\nx=1\n[a]\ny=2\n").is_err());
        assert!(Config::parse("[a\nx=1\n").is_err());
    }
}
