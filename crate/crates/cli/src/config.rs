//! Flat `key = value` configuration files.
//!
//! Every key is the long name of a command-line flag. The file's flags are
//! spliced in directly after the subcommand name, ahead of the user's own
//! arguments, so anything given on the command line wins.

use anyhow::{bail, Context, Result};
use std::path::Path;

/// Global options that take a value (their value must not be mistaken for
/// the subcommand name while scanning).
const VALUED_GLOBALS: [&str; 5] = ["--seed", "--threads", "--out", "--format", "--config"];

pub fn parse_config(text: &str) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key = value, got '{raw}'", lineno + 1);
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() {
            bail!("line {}: empty key", lineno + 1);
        }
        if key == "config" {
            bail!("line {}: config files cannot include other config files", lineno + 1);
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value.to_string());
            }
        }
    }
    Ok(args)
}

pub fn load_config(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in config file {}", path.display()))
}

/// Value of `--config` on the command line, if any.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Position of the subcommand token in `args` (which starts with the
/// program name): the first argument that is neither a flag nor the value
/// of a global option.
pub fn subcommand_position(args: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let a = args[i].as_str();
        if !a.starts_with('-') {
            return Some(i);
        }
        if VALUED_GLOBALS.contains(&a) {
            i += 1;
        }
        i += 1;
    }
    None
}

/// `args` with `extra` inserted right after the subcommand token.
pub fn splice(args: &[String], extra: Vec<String>) -> Vec<String> {
    match subcommand_position(args) {
        Some(pos) => {
            let mut out = args[..=pos].to_vec();
            out.extend(extra);
            out.extend_from_slice(&args[pos + 1..]);
            out
        }
        None => args.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_flat_pairs() {
        let args = parse_config("# sweep\nk = 8\ntheta_deg=10 # inline\nallow-long = true\nverbose = false\n\n").unwrap();
        assert_eq!(args, s(&["--k", "8", "--theta-deg", "10", "--allow-long"]));
        assert!(parse_config("no equals sign").is_err());
        assert!(parse_config("config = other.cfg").is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let args = s(&["bin", "--out", "loss", "loss", "--k", "4"]);
        assert_eq!(subcommand_position(&args), Some(3));
        let merged = splice(&args, s(&["--k", "8"]));
        assert_eq!(merged, s(&["bin", "--out", "loss", "loss", "--k", "8", "--k", "4"]));
        let args = s(&["bin", "--config", "a.cfg", "bound"]);
        assert_eq!(config_path(&args).as_deref(), Some("a.cfg"));
        assert_eq!(subcommand_position(&args), Some(3));
        assert_eq!(config_path(&s(&["bin", "--config=b.cfg"])).as_deref(), Some("b.cfg"));
    }
}
