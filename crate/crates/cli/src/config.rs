//! A JSON settings file is spliced into the argument list right after the
//! subcommand, so later command-line flags override it and unknown keys are
//! rejected by the parser like unknown flags.

use std::ffi::OsString;

use serde_json::Value;

use crate::error::CliError;

const VALUE_FLAGS: &[&str] = &["--config", "--seed", "--threads", "--out", "--on-underpowered"];

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn subcommand_index(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if s.starts_with("--") {
            if !s.contains('=') && VALUE_FLAGS.contains(&s.as_ref()) {
                i += 1;
            }
        } else if !s.starts_with('-') {
            return Some(i);
        }
        i += 1;
    }
    None
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Flags equivalent to a settings object.
pub fn flags_of(settings: &Value) -> Result<Vec<OsString>, CliError> {
    let obj = settings.as_object().ok_or_else(|| CliError::Usage("config file must hold a JSON object".into()))?;
    let mut out = Vec::new();
    for (key, v) in obj {
        if key == "config" || key == "command" {
            continue;
        }
        let flag = format!("--{}", if key == "K" { key.clone() } else { key.replace('_', "-") });
        let text = match v {
            Value::Null | Value::Bool(false) => continue,
            Value::Bool(true) => {
                out.push(flag.into());
                continue;
            }
            Value::Array(items) => items
                .iter()
                .map(|x| scalar(x).ok_or_else(|| CliError::Usage(format!("config key `{key}`: list items must be scalars"))))
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            Value::Object(_) => return Err(CliError::Usage(format!("config key `{key}`: nested objects are not settings"))),
            other => scalar(other).expect("number or string"),
        };
        out.push(format!("{flag}={text}").into());
    }
    Ok(out)
}

/// The argument list with any `--config` file expanded in place.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let shown = path.to_string_lossy().into_owned();
    let text = std::fs::read_to_string(&path).map_err(CliError::io(shown.clone()))?;
    let settings: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{shown}: not valid JSON: {e}")))?;
    let Some(at) = subcommand_index(&args) else {
        return Ok(args);
    };
    // list flags append rather than override, so settings given on the command line are dropped here
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str())
        .filter(|a| a.starts_with("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut out = args[..=at].to_vec();
    out.extend(flags_of(&settings)?.into_iter().filter(|f| {
        let f = f.to_string_lossy();
        !given.iter().any(|g| f.split('=').next() == Some(g.as_str()))
    }));
    out.extend(args[at + 1..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(|s| s.into()).collect()
    }

    #[test]
    fn finds_subcommand_past_global_values() {
        assert_eq!(subcommand_index(&os(&["x", "--seed", "4", "--no-timestamp", "green", "--d", "3"])), Some(4));
        assert_eq!(subcommand_index(&os(&["x", "--seed=4", "green"])), Some(2));
    }

    #[test]
    fn settings_become_flags() {
        let v: Value = serde_json::json!({"d": 3, "u_grid": [0.5, 1], "K": "origin", "no_timestamp": true, "ball": false});
        let flags: Vec<String> = flags_of(&v).unwrap().into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(flags, ["--K=origin", "--d=3", "--no-timestamp", "--u-grid=0.5,1"]);
    }
}
