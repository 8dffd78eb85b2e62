//! Flat `key = value` configuration files. Keys are long flag names of the
//! command; values from the file are placed before the command-line flags so
//! that flags given explicitly win.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Entries of a configuration file in file order. `#` starts a comment.
pub fn parse_config(path: &Path, text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::format(path, format!("line {}: expected `key = value`", i + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(CliError::format(path, format!("line {}: empty key", i + 1)));
        }
        out.push((key.to_string(), unquote(value.trim()).to_string()));
    }
    Ok(out)
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v)
}

fn closest<'a>(key: &str, valid: &[&'a str]) -> Option<&'a str> {
    valid
        .iter()
        .map(|v| (strsim::levenshtein(key, v), *v))
        .filter(|(d, _)| *d <= 3)
        .min()
        .map(|(_, v)| v)
}

/// Checks keys against `valid` and turns entries into `--key value` pairs.
pub fn config_args(path: &Path, entries: &[(String, String)], valid: &[&str]) -> Result<Vec<OsString>> {
    let mut args = Vec::with_capacity(2 * entries.len());
    for (key, value) in entries {
        if key == "config" || !valid.contains(&key.as_str()) {
            let hint = closest(key, valid)
                .map(|s| format!(" (did you mean `{s}`?)"))
                .unwrap_or_default();
            return Err(CliError::Usage(format!(
                "{}: unknown key `{key}`{hint}; valid keys: {}",
                path.display(),
                valid
                    .iter()
                    .filter(|k| **k != "config")
                    .copied()
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        args.push(format!("--{key}").into());
        args.push(value.into());
    }
    Ok(args)
}

/// Path given with `--config`, if any.
pub fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    let mut found = None;
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(p));
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_quotes() {
        let e = parse_config(Path::new("c"), "# run\nseed = 1\n\nhidden = \"4,2\" # widths\n--J=7\n").unwrap();
        assert_eq!(
            e,
            [
                ("seed".to_string(), "1".to_string()),
                ("hidden".to_string(), "4,2".to_string()),
                ("J".to_string(), "7".to_string())
            ]
        );
        assert!(parse_config(Path::new("c"), "").unwrap().is_empty());
        assert!(parse_config(Path::new("c"), "seed 1\n").is_err());
    }

    #[test]
    fn unknown_key_lists_valid_keys_and_suggests() {
        let e = config_args(
            Path::new("c"),
            &[("sed".into(), "1".into())],
            &["seed", "out", "config"],
        )
        .unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("did you mean `seed`"), "{msg}");
        assert!(msg.contains("valid keys: seed, out"), "{msg}");
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn entries_become_flags() {
        let a = config_args(Path::new("c"), &[("seed".into(), "3".into())], &["seed"]).unwrap();
        assert_eq!(a, [OsString::from("--seed"), OsString::from("3")]);
    }

    #[test]
    fn finds_last_config_flag() {
        let args: Vec<OsString> = ["x", "cv", "--config", "a.conf", "--config=b.conf"]
            .iter()
            .map(Into::into)
            .collect();
        assert_eq!(find_config(&args), Some(PathBuf::from("b.conf")));
    }
}
