//! Experiment configuration as flat `key = value` text with `[sections]`.
//!
//! Keys are the long flag names of the subcommand, so a config file and a
//! command line are interchangeable: [`ExperimentConfig::to_args`] turns a
//! config back into flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::Value;

use crate::error::{CliError, CliResult};

const SERIES_KEYS: &[&str] = &["series"];
const TARGET_KEYS: &[&str] = &["target", "compact", "stages"];
const OUTPUT_KEYS: &[&str] = &["out", "resume"];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExperimentConfig {
    pub command: String,
    /// section → key → value
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

fn section_for(key: &str) -> &'static str {
    if SERIES_KEYS.contains(&key) {
        "series"
    } else if TARGET_KEYS.contains(&key) {
        "target"
    } else if OUTPUT_KEYS.contains(&key) {
        "output"
    } else {
        "params"
    }
}

impl ExperimentConfig {
    /// Builds the config from a serialized argument struct.
    pub fn from_args(command: &str, args: &Value) -> Self {
        let mut cfg = ExperimentConfig { command: command.to_string(), sections: BTreeMap::new() };
        if let Value::Object(map) = args {
            for (k, v) in map {
                let text = match v {
                    Value::Null => continue,
                    Value::String(s) => s.clone(),
                    Value::Bool(b) => b.to_string(),
                    other => other.to_string(),
                };
                let key = k.replace('_', "-");
                cfg.sections.entry(section_for(&key).to_string()).or_default().insert(key, text);
            }
        }
        cfg
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.sections.values().find_map(|s| s.get(key)).map(String::as_str)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command = {}", self.command);
        for (name, entries) in &self.sections {
            let _ = writeln!(out, "\n[{name}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                cfg.sections.entry(name.clone()).or_default();
                section = Some(name);
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("config line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            match &section {
                None if k == "command" => cfg.command = v,
                None => return Err(CliError::Input(format!("config line {}: `{k}` outside a section", i + 1))),
                Some(s) => {
                    if cfg.sections.get_mut(s).unwrap().insert(k.clone(), v).is_some() {
                        return Err(CliError::Input(format!("config line {}: repeated key `{k}`", i + 1)));
                    }
                }
            }
        }
        if cfg.command.is_empty() {
            return Err(CliError::Input("config has no command".into()));
        }
        Ok(cfg)
    }

    /// Flags equivalent to this config, without the subcommand.
    pub fn to_args(&self) -> Vec<String> {
        let mut out = Vec::new();
        for entries in self.sections.values() {
            for (k, v) in entries {
                match v.as_str() {
                    "true" => out.push(format!("--{k}")),
                    "false" => {}
                    _ => {
                        out.push(format!("--{k}"));
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }

    /// Header lines for CSV outputs.
    pub fn comment_lines(&self) -> String {
        self.to_text().lines().filter(|l| !l.is_empty()).map(|l| format!("# config: {l}\n")).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("command".into(), Value::String(self.command.clone()));
        for (name, entries) in &self.sections {
            let sec = entries.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
            obj.insert(name.clone(), Value::Object(sec));
        }
        Value::Object(obj)
    }

    pub fn from_json(v: &Value) -> CliResult<Self> {
        let bad = || CliError::Input("malformed config object".into());
        let obj = v.as_object().ok_or_else(bad)?;
        let mut cfg = ExperimentConfig::default();
        for (k, v) in obj {
            if k == "command" {
                cfg.command = v.as_str().ok_or_else(bad)?.to_string();
            } else {
                let sec = v.as_object().ok_or_else(bad)?;
                let entries = sec
                    .iter()
                    .map(|(k, v)| Ok((k.clone(), v.as_str().ok_or_else(bad)?.to_string())))
                    .collect::<CliResult<_>>()?;
                cfg.sections.insert(k.clone(), entries);
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentConfig {
        let args = serde_json::json!({
            "series": "alt-ordinary",
            "target": "const:0.3",
            "T": 1000.0,
            "step": 0.1,
            "max_cells": null,
            "out": "results",
            "verbose": true,
        });
        ExperimentConfig::from_args("translate-scan", &args)
    }

    #[test]
    fn text_round_trip() {
        let cfg = sample();
        let text = cfg.to_text();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_text(), text);
        assert_eq!(cfg.get("series"), Some("alt-ordinary"));
        assert_eq!(cfg.get("step"), Some("0.1"));
        assert!(cfg.get("max-cells").is_none());
    }

    #[test]
    fn json_round_trip_and_flags() {
        let cfg = sample();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let args = cfg.to_args();
        assert!(args.windows(2).any(|w| w[0] == "--T" && w[1] == "1000.0"));
        assert!(args.contains(&"--verbose".to_string()));
    }

    #[test]
    fn parse_errors() {
        assert!(ExperimentConfig::parse("[a]\nb = 1\n").is_err());
        assert!(ExperimentConfig::parse("command = x\nb = 1\n").is_err());
        assert!(ExperimentConfig::parse("command = x\n[a]\nb\n").is_err());
    }
}
