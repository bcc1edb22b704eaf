//! `key = value` config files. Each key is the long name of a flag of the
//! chosen subcommand; the pairs are spliced in right after the subcommand so
//! that flags given on the command line win.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Parses the file body into `(key, value)` pairs. Blank lines and lines
/// starting with `#` are ignored.
pub fn parse_pairs(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(CliError::Config(format!("config line {}: bad key {key:?}", i + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Flag arguments for the pairs. `true` and `false` switch boolean flags.
pub fn pairs_to_args(pairs: &[(String, String)]) -> Vec<OsString> {
    let mut out = Vec::new();
    for (key, value) in pairs {
        match value.as_str() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    out
}

/// Returns `args` with the contents of the `--config` file, if any, placed
/// after the subcommand name.
pub fn splice_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut config = None;
    let mut command_at = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            config = Some(
                args.get(i + 1).cloned().ok_or_else(|| CliError::config("--config needs a path"))?,
            );
            i += 2;
            continue;
        }
        if let Some(path) = a.strip_prefix("--config=") {
            config = Some(path.into());
        } else if command_at.is_none() && !a.starts_with('-') {
            command_at = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(at)) = (config, command_at) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let extra = pairs_to_args(&parse_pairs(&text)?);
    let mut out = args[..=at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}
