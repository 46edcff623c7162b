use std::io::Write;
use std::path::Path;

use levelbound::Real;
use serde_json::{json, Map, Value};

use crate::error::CliError;

// Non-finite floats have no JSON encoding; they become null.
fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// A number as its full-precision decimal, its nearest `f64` (null when out
/// of range) and its natural log (null at zero).
pub fn number<T: Real>(x: &T) -> Value {
    let f = x.to_f64();
    json!({
        "decimal": x.to_decimal(),
        "f64": finite(f),
        "ln": finite(x.ln_f64()),
    })
}

pub fn plain(x: f64) -> Value {
    finite(x)
}

pub struct Manifest {
    pub command: &'static str,
    pub params: Value,
    pub precision_bits: u32,
    pub seed: Option<u64>,
}

impl Manifest {
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "params": self.params,
            "version": env!("CARGO_PKG_VERSION"),
            "precision_bits": self.precision_bits,
            "seed": self.seed,
            "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }
}

/// A report object with the manifest first.
pub fn report(manifest: &Manifest, body: Map<String, Value>) -> Value {
    let mut out = Map::new();
    out.insert("manifest".into(), manifest.to_json());
    out.extend(body);
    Value::Object(out)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Writes to `path` if given, otherwise to stdout.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn emit_json(path: Option<&Path>, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    emit(path, &text)
}
