//! `--config <file>`: a flat `key = value` file whose entries act as
//! command-line flags that were not given explicitly.

use std::path::Path;

use anyhow::{bail, Context, Result};

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; keys may be written with or without leading dashes and with
/// underscores in place of hyphens.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config: line {} is not of the form key = value", k + 1);
        };
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        if key.is_empty() || key == "config" {
            bail!("config: line {} has an invalid key", k + 1);
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Result<Option<String>> {
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            return args
                .get(i + 1)
                .cloned()
                .map(Some)
                .context("config: --config needs a file path");
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Ok(Some(v.to_string()));
        }
    }
    Ok(None)
}

/// Appends config entries to `args` unless the same flag is already
/// present. `true` turns into a bare switch, `false` drops the entry.
pub fn merge_config(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text =
        std::fs::read_to_string(Path::new(&path)).with_context(|| format!("config: cannot read {path}"))?;
    let mut merged = args;
    for (key, value) in parse_config(&text)? {
        let flag = format!("--{key}");
        let given = merged
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        match value.as_str() {
            "true" => merged.push(flag),
            "false" => {}
            _ => {
                merged.push(flag);
                merged.push(value);
            }
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_and_normalizes_keys() {
        let kv = parse_config("# comment\n\nrule = soft\n--max_iter=50\n").unwrap();
        assert_eq!(
            kv,
            vec![
                ("rule".to_string(), "soft".to_string()),
                ("max-iter".to_string(), "50".to_string())
            ]
        );
        assert!(parse_config("novalue\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        std::fs::write(
            &path,
            "rule = soft\nseed = 9\nno-intercept = true\nquiet = false\n",
        )
        .unwrap();
        let args = strings(&[
            "ipod",
            "fit",
            "--rule",
            "hard",
            "--config",
            path.to_str().unwrap(),
        ]);
        let merged = merge_config(args).unwrap();
        assert_eq!(merged.iter().filter(|a| *a == "--rule").count(), 1);
        assert!(merged.windows(2).any(|w| w[0] == "--rule" && w[1] == "hard"));
        assert!(merged.windows(2).any(|w| w[0] == "--seed" && w[1] == "9"));
        assert!(merged.contains(&"--no-intercept".to_string()));
        assert!(!merged.contains(&"--quiet".to_string()));
    }
}
