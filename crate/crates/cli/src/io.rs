//! File access with errors that name the file (and line, for parse errors).

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use adlsense_core::Error as CoreError;
use anyhow::{Context, Result};
use serde_json::json;

/// A failure tied to one file, and to a line when known.
#[derive(Debug)]
pub struct InputError {
    pub kind: &'static str,
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl InputError {
    pub fn new(kind: &'static str, path: &Path, line: Option<usize>, message: impl fmt::Display) -> Self {
        InputError {
            kind,
            path: path.to_path_buf(),
            line,
            message: message.to_string(),
        }
    }

    fn core(path: &Path, err: CoreError) -> Self {
        match err {
            CoreError::Parse { line, reason } if line > 0 => InputError::new("parse", path, Some(line), reason),
            CoreError::Parse { reason, .. } => InputError::new("parse", path, None, reason),
            other => InputError::new("input", path, None, other),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path.display())?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for InputError {}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| InputError::new("io", path, None, format!("cannot read: {e}")).into())
}

/// Reads `path` and parses it with `parse`.
pub fn load<T>(path: &Path, parse: impl FnOnce(&str) -> adlsense_core::Result<T>) -> Result<T> {
    let text = read_text(path)?;
    parse(&text).map_err(|e| InputError::core(path, e).into())
}

/// 1-based line holding byte `offset` of `text`.
pub fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())].iter().filter(|&&b| b == b'\n').count() + 1
}

/// Writes to `path`, or stdout when `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("{}: cannot create", dir.display()))?;
            }
            fs::write(p, text).with_context(|| format!("{}: cannot write", p.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                // the reader went away (e.g. `| head`); nothing left to do
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.context("stdout"),
            }
        }
    }
}

/// One-line JSON description of a failure for stderr.
pub fn error_report(err: &anyhow::Error) -> String {
    let located = err.chain().find_map(|e| e.downcast_ref::<InputError>());
    let kind = match located {
        Some(e) => e.kind,
        None if err.chain().any(|e| e.downcast_ref::<std::io::Error>().is_some()) => "io",
        None => "runtime",
    };
    json!({
        "error": {
            "kind": kind,
            "message": format!("{err:#}"),
            "file": located.map(|e| e.path.display().to_string()),
            "line": located.and_then(|e| e.line),
        }
    })
    .to_string()
}
