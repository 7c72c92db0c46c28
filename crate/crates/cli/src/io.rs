//! Config loading and artifact output.

use std::path::Path;

use pom::{build_standard, Pom, StandardPom};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::CliError;

/// Parses a TOML config. Every command that needs one rejects its absence.
pub(crate) fn load_config<T: DeserializeOwned>(path: Option<&Path>) -> Result<T, CliError> {
    let path = path.ok_or_else(|| CliError::Config("this command needs --config".into()))?;
    parse_file(path)
}

/// As [`load_config`], with the type's defaults when no file is given.
pub(crate) fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    path.map_or_else(|| Ok(T::default()), parse_file)
}

fn parse_file<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// A named standard POM, or a JSON POM file when `file` is set.
pub(crate) fn resolve_pom(id: Option<&str>, file: Option<&Path>) -> Result<(Pom, String), CliError> {
    match (id, file) {
        (Some(id), None) => {
            let kind: StandardPom = id.parse().map_err(|_| CliError::Config(format!("unknown POM id {id:?}")))?;
            Ok((build_standard(kind)?, kind.to_string()))
        }
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let pom = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Ok((pom, path.display().to_string()))
        }
        (None, None) => Err(CliError::Config("missing POM: set pom or pom_file".into())),
        (Some(_), Some(_)) => Err(CliError::Config("set only one of pom and pom_file".into())),
    }
}

/// Writes to `out`, or to standard output when it is absent.
pub(crate) fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    use std::io::Write;
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Output(e.to_string())),
    }
}

pub(crate) fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    emit(out, text.as_bytes())
}

/// CSV with a header row and one record per row.
pub(crate) fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

/// Summary lines go to standard error so that standard output holds only the artifact.
pub(crate) fn summary(line: &str) {
    eprintln!("{line}");
}

pub(crate) fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
