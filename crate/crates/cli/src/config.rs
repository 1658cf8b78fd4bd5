//! Config-file and environment overrides, applied by rewriting argv.
//!
//! Precedence: command-line flags, then `JUMPCHAMP_<FLAG>` variables, then
//! the `key = value` file named by `--config` (or `JUMPCHAMP_CONFIG`).
//! Injected values sit right after the subcommand token; later occurrences
//! win because the parser lets arguments override themselves.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Command as ClapCommand};

use crate::error::CliError;

pub const ENV_PREFIX: &str = "JUMPCHAMP_";

pub fn env_name(long: &str) -> String {
    let mut name = String::from(ENV_PREFIX);
    for c in long.chars() {
        name.push(if c == '-' {
            '_'
        } else {
            c.to_ascii_uppercase()
        });
    }
    name
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str, origin: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected `key = value`, got `{line}`",
                origin.display(),
                i + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        out.push((key, value));
    }
    Ok(out)
}

fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    std::env::var_os(env_name("config")).map(PathBuf::from)
}

fn truthy(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" | "" => Some(false),
        _ => None,
    }
}

fn push_flag(
    sub: &ClapCommand,
    key: &str,
    value: &str,
    source: &str,
    out: &mut Vec<OsString>,
) -> Result<(), CliError> {
    let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key)) else {
        return Err(CliError::Usage(format!(
            "{source}: `{key}` is not an option of `{}`",
            sub.get_name()
        )));
    };
    if matches!(arg.get_action(), ArgAction::SetTrue) {
        match truthy(value) {
            Some(true) => out.push(format!("--{key}").into()),
            Some(false) => {}
            None => {
                return Err(CliError::Usage(format!(
                    "{source}: `{key}` expects true or false"
                )))
            }
        }
    } else {
        out.push(format!("--{key}={value}").into());
    }
    Ok(())
}

/// Rewrite `args` with config-file and environment values.
pub fn expand_args(cmd: &ClapCommand, args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(pos) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
    else {
        return Ok(args);
    };
    let pos = pos + 1;
    let Some(sub) = cmd.find_subcommand(args[pos].to_string_lossy().as_ref()) else {
        return Ok(args);
    };

    let mut injected = Vec::new();
    if let Some(path) = find_config(&args) {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let source = path.display().to_string();
        for (key, value) in parse_config(&text, &path)? {
            if key == "config" || std::env::var_os(env_name(&key)).is_some() {
                continue;
            }
            push_flag(sub, &key, &value, &source, &mut injected)?;
        }
    }
    for arg in sub.get_arguments() {
        let Some(long) = arg.get_long() else { continue };
        if long == "config" {
            continue;
        }
        if let Ok(value) = std::env::var(env_name(long)) {
            push_flag(sub, long, &value, &env_name(long), &mut injected)?;
        }
    }

    let mut out = Vec::with_capacity(args.len() + injected.len());
    out.extend_from_slice(&args[..=pos]);
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_names() {
        assert_eq!(env_name("segment-size"), "JUMPCHAMP_SEGMENT_SIZE");
        assert_eq!(env_name("I"), "JUMPCHAMP_I");
    }

    #[test]
    fn config_lines() {
        let kv = parse_config(
            "# run\nk = 2\nsegment_size = 65536 # small\n\nout=\"res\"\n",
            Path::new("c"),
        )
        .unwrap();
        assert_eq!(
            kv,
            vec![
                ("k".into(), "2".into()),
                ("segment-size".into(), "65536".into()),
                ("out".into(), "res".into())
            ]
        );
        assert!(parse_config("k 2\n", Path::new("c")).is_err());
    }
}
