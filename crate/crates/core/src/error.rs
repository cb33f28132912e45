use std::fmt;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// A 1-based position inside an input file. `column` counts fields, not bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: Option<usize>,
}

impl Location {
    pub fn line(line: usize) -> Self {
        Self { line, column: None }
    }

    pub fn cell(line: usize, column: usize) -> Self {
        Self {
            line,
            column: Some(column),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(c) => write!(f, "{}:{}", self.line, c),
            None => write!(f, "{}", self.line),
        }
    }
}

/// One located problem found while reading or cross-checking a file.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub location: Option<Location>,
    pub message: String,
}

impl Diagnostic {
    pub fn at(location: Location, message: impl Into<String>) -> Self {
        Self {
            location: Some(location),
            message: message.into(),
        }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self {
            location: None,
            message: message.into(),
        }
    }
}

/// Every diagnostic collected for a single input source.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub source: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, d) in self.diagnostics.iter().enumerate() {
            if idx > 0 {
                writeln!(f)?;
            }
            match d.location {
                Some(loc) => write!(f, "{}:{}: {}", self.source, loc, d.message)?,
                None => write!(f, "{}: {}", self.source, d.message)?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed or inconsistent input, with every located violation.
    #[error("{0}")]
    Invalid(Report),

    #[error("invalid {what}: {reason}")]
    Config { what: &'static str, reason: String },

    #[error("period {t}: {available} lag(s) available, {required} required")]
    InsufficientHistory {
        t: i64,
        available: usize,
        required: usize,
    },

    /// Two indicator results that cannot be compared.
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
}

impl Error {
    pub fn invalid(source: impl Into<String>, diagnostics: Vec<Diagnostic>) -> Self {
        Error::Invalid(Report {
            source: source.into(),
            diagnostics,
        })
    }

    pub fn config(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Located diagnostics carried by this error, if any.
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            Error::Invalid(r) => &r.diagnostics,
            _ => &[],
        }
    }
}
