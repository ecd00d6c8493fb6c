//! `--config FILE`: a TOML file whose keys are long flag names. Its values
//! are spliced into the argument list right after the subcommand, so any
//! flag given on the command line (which comes later) overrides the file.
//!
//! Top-level keys apply to every subcommand; a table named after the
//! subcommand (e.g. `[train]`) applies to that subcommand only and
//! overrides the top-level keys.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use super::CliError;

const CONFIG_FLAG: &str = "--config";

/// Removes `--config FILE` / `--config=FILE` from `args` and returns the path.
fn take_config_path(args: &mut Vec<OsString>) -> Result<Option<PathBuf>, CliError> {
    let mut found = None;
    let mut i = 1;
    while i < args.len() {
        let arg = args[i].to_string_lossy().into_owned();
        if arg == "--" {
            break;
        }
        if arg == CONFIG_FLAG {
            if i + 1 >= args.len() {
                return Err(CliError::usage("--config needs a file path"));
            }
            found = Some(PathBuf::from(args.remove(i + 1)));
            args.remove(i);
        } else if let Some(path) = arg.strip_prefix("--config=") {
            found = Some(PathBuf::from(path));
            args.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(found)
}

fn value_tokens(key: &str, value: &toml::Value) -> Result<Vec<String>, CliError> {
    let flag = format!("--{}", key.replace('_', "-"));
    let scalar = |v: &toml::Value| -> Result<String, CliError> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            other => Err(CliError::usage(format!(
                "config key `{key}`: unsupported value {other}"
            ))),
        }
    };
    Ok(match value {
        toml::Value::Boolean(true) => vec![flag],
        toml::Value::Boolean(false) => Vec::new(),
        toml::Value::Array(items) => {
            let joined = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(",");
            vec![flag, joined]
        }
        other => vec![flag, scalar(other)?],
    })
}

/// Expands a `--config` file (if any) into flags placed after the subcommand.
pub fn expand(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = take_config_path(&mut args)? else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;

    let Some(sub_pos) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    let subcommand = args[sub_pos].to_string_lossy().into_owned();

    let mut tokens = Vec::new();
    for (key, value) in &table {
        if !value.is_table() {
            tokens.extend(value_tokens(key, value)?);
        }
    }
    if let Some(toml::Value::Table(section)) = table.get(&subcommand) {
        for (key, value) in section {
            tokens.extend(value_tokens(key, value)?);
        }
    }
    let tail = args.split_off(sub_pos + 1);
    args.extend(tokens.into_iter().map(OsString::from));
    args.extend(tail);
    Ok(args)
}
