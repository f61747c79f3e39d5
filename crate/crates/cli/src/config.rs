//! `key = value` configuration files, spliced into the argument list so
//! that command-line flags given later take precedence.

use std::path::Path;

use crate::error::CliError;

/// Parse a config file into flag arguments.
pub fn config_args(text: &str, origin: &Path) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Input(format!(
                "{}:{}: expected key = value",
                origin.display(),
                lineno + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(CliError::Input(format!(
                "{}:{}: invalid key {key:?}",
                origin.display(),
                lineno + 1
            )));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

const SUBCOMMANDS: [&str; 8] = [
    "eca-features",
    "predict",
    "cluster",
    "lambda",
    "transient",
    "ts",
    "synth",
    "rerun",
];

/// Remove `--config FILE` from `argv` and insert the file's flags right
/// after the subcommand name.
pub fn expand_config(argv: &[String]) -> Result<Vec<String>, CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut i = 0;
    while i < argv.len() {
        let a = &argv[i];
        if a == "--config" {
            let path = argv
                .get(i + 1)
                .ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
            config = Some(path.clone());
            i += 2;
            continue;
        }
        if let Some(path) = a.strip_prefix("--config=") {
            config = Some(path.to_string());
            i += 1;
            continue;
        }
        rest.push(a.clone());
        i += 1;
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    let extra = config_args(&text, path)?;
    let at = rest
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map(|p| p + 2)
        .ok_or_else(|| CliError::Usage("a subcommand is required".into()))?;
    let mut out = rest[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_pairs_and_booleans() {
        let args = config_args("# c\nt_max = 2\nreselect = true\njson=false\n\n", Path::new("x")).unwrap();
        assert_eq!(args, s(&["--t-max", "2", "--reselect"]));
        assert!(config_args("oops\n", Path::new("x")).is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "t = 2\n").unwrap();
        let argv = s(&[
            "infoproc",
            "--config",
            cfg.to_str().unwrap(),
            "eca-features",
            "-t",
            "1",
        ]);
        let out = expand_config(&argv).unwrap();
        assert_eq!(out, s(&["infoproc", "eca-features", "--t", "2", "-t", "1"]));
    }
}
