//! Readers for external score formats.

use std::fmt;
use std::path::Path;

use crate::score::Score;

pub mod musicxml;
pub mod text;

pub use musicxml::parse_musicxml;
pub use text::{parse_interchange_text, write_interchange_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub file: Option<String>,
    /// `line N` for text input, an element path for XML.
    pub position: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub location: Location,
    pub message: String,
}

impl ParseDiagnostic {
    pub fn warning(position: impl Into<String>, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            severity: Severity::Warning,
            location: Location { file: None, position: position.into() },
            message: message.into(),
        }
    }

    pub fn error(position: impl Into<String>, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            severity: Severity::Error,
            location: Location { file: None, position: position.into() },
            message: message.into(),
        }
    }

    pub fn in_file(mut self, file: impl Into<String>) -> Self {
        self.location.file = Some(file.into());
        self
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let severity = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match &self.location.file {
            Some(file) => write!(f, "{severity}: {file}: {}: {}", self.location.position, self.message),
            None => write!(f, "{severity}: {}: {}", self.location.position, self.message),
        }
    }
}

/// A failed parse. Carries the fatal diagnostic plus any warnings seen first.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{error}")]
pub struct ParseError {
    pub error: ParseDiagnostic,
    pub warnings: Vec<ParseDiagnostic>,
}

impl ParseError {
    pub(crate) fn new(position: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError { error: ParseDiagnostic::error(position, message), warnings: Vec::new() }
    }

    pub fn in_file(mut self, file: &str) -> Self {
        self.error = self.error.in_file(file);
        self.warnings = self.warnings.into_iter().map(|w| w.in_file(file)).collect();
        self
    }
}

pub type Parsed = (Score, Vec<ParseDiagnostic>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    MusicXml,
    Interchange,
}

impl Format {
    /// `.musicxml` and `.xml` are MusicXML; anything else is interchange text.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("musicxml") | Some("xml") => Format::MusicXml,
            _ => Format::Interchange,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Read and parse a score file, choosing the format by extension.
pub fn load_score(path: &Path) -> Result<Parsed, LoadError> {
    let name = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| LoadError::Io { path: name.clone(), source })?;
    let parsed = match Format::from_path(path) {
        Format::MusicXml => parse_musicxml(&bytes),
        Format::Interchange => match std::str::from_utf8(&bytes) {
            Ok(text) => parse_interchange_text(text),
            Err(e) => Err(ParseError::new("file", format!("not valid UTF-8: {e}"))),
        },
    };
    match parsed {
        Ok((score, warnings)) => Ok((score, warnings.into_iter().map(|w| w.in_file(name.clone())).collect())),
        Err(e) => Err(LoadError::Parse(e.in_file(&name))),
    }
}
