//! Layered run configuration: built-in defaults, then the `--config` TOML
//! file, then command-line flags. The merged table is written next to the
//! outputs so a run can be repeated exactly.
//!
//! In the TOML file, top-level keys apply to every command that has a
//! parameter of that name and `[command]` tables apply to one command.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

pub type Table = Map<String, Value>;

/// Flags that were given, as a JSON object. Unset options and unset boolean
/// switches are left out so they do not mask lower layers.
fn given<A: Serialize>(args: &A) -> Result<Table, CliError> {
    match serde_json::to_value(args).map_err(|e| CliError::Internal(e.to_string()))? {
        Value::Object(m) => Ok(m
            .into_iter()
            .filter(|(_, v)| !matches!(v, Value::Null | Value::Bool(false)))
            .collect()),
        _ => Err(CliError::Internal("arguments did not serialize to a table".into())),
    }
}

fn known_keys<A: Serialize + Default>() -> Result<Vec<String>, CliError> {
    match serde_json::to_value(A::default()).map_err(|e| CliError::Internal(e.to_string()))? {
        Value::Object(m) => Ok(m.into_iter().map(|(k, _)| k).collect()),
        _ => Err(CliError::Internal("arguments did not serialize to a table".into())),
    }
}

fn read_config(path: &Path, command: &str, keys: &[String]) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let doc: toml::Table = toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
    let mut out = Table::new();
    let to_json = |v: &toml::Value| {
        serde_json::to_value(v).map_err(|e| CliError::Usage(format!("bad config value: {e}")))
    };
    for (k, v) in &doc {
        if !v.is_table() && keys.contains(k) {
            out.insert(k.clone(), to_json(v)?);
        }
    }
    if let Some(section) = doc.get(command) {
        let section = section
            .as_table()
            .ok_or_else(|| CliError::Usage(format!("config key {command:?} must be a table")))?;
        for (k, v) in section {
            if !keys.contains(k) {
                return Err(CliError::Usage(format!("unknown key {k:?} in config section [{command}]")));
            }
            out.insert(k.clone(), to_json(v)?);
        }
    }
    Ok(out)
}

/// Merges defaults < config file < flags and deserializes the result.
pub fn resolve<A>(
    command: &str,
    flags: &A,
    config: Option<&Path>,
    defaults: &[(&str, Value)],
) -> Result<(A, Table), CliError>
where
    A: Serialize + DeserializeOwned + Default,
{
    let mut merged: Table = defaults.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    if let Some(path) = config {
        merged.extend(read_config(path, command, &known_keys::<A>()?)?);
    }
    merged.extend(given(flags)?);
    let args = serde_json::from_value(Value::Object(merged.clone()))
        .map_err(|e| CliError::Usage(format!("invalid parameters for {command}: {e}")))?;
    Ok((args, merged))
}

/// `<out>.run.toml`, or `<dir>/run.toml` when the output is a directory.
pub fn stamp_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("run.toml")
    } else {
        let mut name = out.as_os_str().to_owned();
        name.push(".run.toml");
        PathBuf::from(name)
    }
}

/// Writes the resolved parameters, keyed by command, as TOML.
pub fn write_stamp(path: &Path, command: &str, resolved: &Table) -> Result<(), CliError> {
    let mut table = toml::Table::new();
    table.insert("command".into(), toml::Value::String(command.into()));
    let params: toml::Table = serde_json::from_value(Value::Object(resolved.clone()))
        .map_err(|e| CliError::Internal(format!("cannot render run config: {e}")))?;
    table.insert(command.into(), toml::Value::Table(params));
    let text = toml::to_string(&table).map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}
