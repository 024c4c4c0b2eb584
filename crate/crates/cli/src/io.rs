//! Companion files and small output helpers.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Companion<'a> {
    id: std::borrow::Cow<'a, str>,
    text: std::borrow::Cow<'a, str>,
}

fn data_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Reads `{"id", "text"}` lines into a map; duplicate ids are an error.
pub fn load_companions(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let file = File::open(path).map_err(|e| data_err(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| data_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let c: Companion = serde_json::from_str(&line)
            .map_err(|e| data_err(path, format!("line {}: {e}", i + 1)))?;
        if out.insert(c.id.to_string(), c.text.into_owned()).is_some() {
            return Err(data_err(path, format!("line {}: duplicate id {:?}", i + 1, c.id)));
        }
    }
    Ok(out)
}

pub fn save_companions(companions: &BTreeMap<String, String>, path: &Path) -> CliResult<()> {
    let file = File::create(path).map_err(|e| data_err(path, e))?;
    let mut w = BufWriter::new(file);
    for (id, text) in companions {
        let rec = Companion { id: id.into(), text: text.into() };
        serde_json::to_writer(&mut w, &rec).map_err(|e| data_err(path, e))?;
        w.write_all(b"\n").map_err(|e| data_err(path, e))?;
    }
    w.flush().map_err(|e| data_err(path, e))
}

pub fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => std::fs::create_dir_all(p).map_err(|e| data_err(p, e)),
        _ => Ok(()),
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    ensure_parent(path)?;
    std::fs::write(path, text).map_err(|e| data_err(path, e))
}
