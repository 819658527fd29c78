use std::io::Write;
use std::path::{Path, PathBuf};

use kingsline::verify::PinnedConventions;
use kingsline::PINNED_CONVENTIONS;
use serde::Serialize;

/// Default output directory when `--out-dir` is not given.
pub const OUT_DIR_ENV: &str = "KINGSLINE_OUT_DIR";

/// Bumped whenever a report layout in `schemas/` changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Engine(#[from] kingsline::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Engine(kingsline::Error::IncompatibleRule { .. } | kingsline::Error::NoTrials) => 2,
            CliError::Io { .. } => 3,
            CliError::Engine(_) => 1,
        }
    }
}

pub fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Header shared by every JSON report.
#[derive(Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema: &'static str,
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub d: Vec<u32>,
    pub backend: &'static str,
    pub seed: Option<u64>,
    pub conventions: PinnedConventions,
    pub body: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(schema: &'static str, d: Vec<u32>, backend: &'static str, seed: Option<u64>, body: T) -> Self {
        Self {
            schema,
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            d,
            backend,
            seed,
            conventions: PINNED_CONVENTIONS,
            body,
        }
    }
}

/// Write to a temporary file in the target directory, then rename over the
/// destination.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}
