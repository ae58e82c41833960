//! The report envelope shared by every experiment, and atomic emission.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct Summary {
    /// What the experiment is expected to show.
    pub expected: String,
    pub observed: String,
    pub holds: bool,
    /// Scope note for experiments that only witness a limit statement on
    /// finitely many instances.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub tolerances: Value,
    pub version: &'static str,
    /// Seconds since the Unix epoch. The only field that changes between
    /// identical runs.
    pub generated_at: u64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub experiment: &'static str,
    pub spec: Value,
    pub results: Vec<Value>,
    /// Experiment-wide data that is not per item, such as certificates.
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    pub summary: Summary,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(experiment: &'static str, spec: Value, seed: Option<u64>, tolerances: Value) -> Self {
        let generated_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Report {
            experiment,
            spec,
            results: Vec::new(),
            details: Value::Null,
            summary: Summary { expected: String::new(), observed: String::new(), holds: true, caveat: None },
            provenance: Provenance { seed, tolerances, version: env!("CARGO_PKG_VERSION"), generated_at },
        }
    }

    pub fn push(&mut self, item: impl Serialize) {
        self.results.push(serde_json::to_value(item).expect("report items serialize"));
    }
}

/// A finished experiment: the report plus whichever alternative renderings
/// the experiment offers.
pub struct Outcome {
    pub report: Report,
    pub csv: Option<String>,
    pub svg: Option<String>,
    /// A budget ran out, so the verdict is not conclusive.
    pub incomplete: bool,
}

impl Outcome {
    pub fn new(report: Report) -> Self {
        Outcome { report, csv: None, svg: None, incomplete: false }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
