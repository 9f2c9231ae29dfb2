//! Flat `key = value` run files.
//!
//! ```text
//! # kicked chart
//! command = chart
//! family = kicked
//! x = omega_t:0:6.283185307179586:201
//! format = csv
//! ```
//!
//! Each key becomes the long flag `--key` (underscores read as hyphens) and
//! is placed ahead of the command-line flags, so flags given on the command
//! line win. `true`/`false` switch boolean flags on or off. Blank lines and
//! lines starting with `#` are ignored.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub entries: Vec<(String, String)>,
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut command = None;
    let mut entries: Vec<(String, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            line: k + 1,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().to_string();
        if key.is_empty() || key.starts_with('-') {
            return Err(Error::Config {
                line: k + 1,
                reason: format!("bad key `{key}`"),
            });
        }
        if key == "config" {
            return Err(Error::Config {
                line: k + 1,
                reason: "config files cannot include other config files".into(),
            });
        }
        if entries.iter().any(|(k2, _)| *k2 == key) || key == "command" && command.is_some() {
            return Err(Error::Config {
                line: k + 1,
                reason: format!("duplicate key `{key}`"),
            });
        }
        if key == "command" {
            command = Some(value);
        } else {
            entries.push((key, value));
        }
    }
    Ok(ConfigFile { command, entries })
}

pub fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

impl ConfigFile {
    /// Flags equivalent to the file's assignments.
    pub fn to_args(&self) -> Vec<OsString> {
        let mut out = Vec::new();
        for (k, v) in &self.entries {
            match v.as_str() {
                "true" => out.push(format!("--{k}").into()),
                "false" => {}
                _ => out.push(format!("--{k}={v}").into()),
            }
        }
        out
    }
}

/// Splices the config file named by `--config` into `args`.
///
/// The result is `[program, subcommand, file flags…, remaining args…]`.
pub fn expand_args(args: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>> {
    let mut iter = args.into_iter();
    let program = iter.next().unwrap_or_else(|| "paramres".into());
    let rest: Vec<OsString> = iter.collect();

    let mut config_path: Option<OsString> = None;
    let mut kept = Vec::with_capacity(rest.len());
    let mut k = 0;
    while k < rest.len() {
        let a = &rest[k];
        let s = a.to_string_lossy();
        if s == "--config" {
            let v = rest
                .get(k + 1)
                .ok_or_else(|| Error::invalid("config", "missing path after --config"))?;
            config_path = Some(v.clone());
            k += 2;
            continue;
        }
        if let Some(p) = s.strip_prefix("--config=") {
            config_path = Some(p.into());
            k += 1;
            continue;
        }
        kept.push(a.clone());
        k += 1;
    }

    let sub_pos = kept
        .iter()
        .position(|a| subcommands.contains(&a.to_string_lossy().as_ref()));
    let Some(path) = config_path else {
        let mut out = vec![program];
        out.extend(kept);
        return Ok(out);
    };
    let file = read_config(Path::new(&path))?;
    let sub = match (sub_pos, &file.command) {
        (Some(p), _) => kept.remove(p),
        (None, Some(c)) => c.into(),
        (None, None) => {
            return Err(Error::invalid("command", "no subcommand given on the command line or in the config file"))
        }
    };
    let mut out = vec![program, sub];
    out.extend(file.to_args());
    out.extend(kept);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_translates() {
        let c = parse_config("# x\ncommand = chart\nn_max = 8\n\nresonant = true\nquiet = false\n").unwrap();
        assert_eq!(c.command.as_deref(), Some("chart"));
        let args: Vec<String> = c.to_args().into_iter().map(|a| a.into_string().unwrap()).collect();
        assert_eq!(args, ["--n-max=8", "--resonant"]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(parse_config("alpha 1"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(
            parse_config("a = 1\na = 2"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(parse_config("config = other.cfg").is_err());
    }

    #[test]
    fn splices_file_before_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "command = classify\nalpha = 0.5\n").unwrap();
        let args: Vec<OsString> = ["paramres", "--format", "json", "--config", path.to_str().unwrap(), "--alpha", "2"]
            .iter()
            .map(Into::into)
            .collect();
        let out: Vec<String> = expand_args(args, &["classify"])
            .unwrap()
            .into_iter()
            .map(|a| a.into_string().unwrap())
            .collect();
        assert_eq!(out, ["paramres", "classify", "--alpha=0.5", "--format", "json", "--alpha", "2"]);
    }
}
