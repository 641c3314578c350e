//! CSV and JSON writers. Numbers carry 17 significant digits, lines end in LF.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::CliError;

pub fn number(x: f64) -> String {
    // no "-0" in files
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Renders a table with the given header; every cell is formatted by [`number`].
pub fn csv<'a>(header: &[&str], rows: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}", number(*x));
        }
        s.push('\n');
    }
    s
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    log::info!("wrote {}", dir.join(name).display());
    Ok(())
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// `v<crate version>`, in the style of `git describe`.
pub fn version() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}
