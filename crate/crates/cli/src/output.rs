//! CSV and report writers. Numbers are written with 17 significant digits
//! so that they read back bit-for-bit.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    path: PathBuf,
    writer: csv::Writer<std::fs::File>,
}

impl Table {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self, CliError> {
        let path = dir.join(name);
        let mut writer = csv::Writer::from_path(&path).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        writer.write_record(header).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self { path, writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| CliError::Config(format!("{}: {e}", self.path.display())))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush()?;
        Ok(self.path)
    }
}

/// Pretty JSON with an optional `generated_at` header field.
pub fn write_report<T: Serialize>(dir: &Path, name: &str, body: &T, stamp: bool) -> Result<PathBuf, CliError> {
    let mut value = serde_json::to_value(body).map_err(|e| CliError::Config(e.to_string()))?;
    if stamp {
        if let serde_json::Value::Object(map) = &mut value {
            map.insert("generated_at".into(), chrono::Utc::now().to_rfc3339().into());
        }
    }
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}
