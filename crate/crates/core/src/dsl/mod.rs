//! Text format for workflows (`.rvm` files).
//!
//! ```text
//! version 1;
//! workflow "case-study" {
//!   instance phi : builtin.failure2oo2 {
//!     PAR_1 = 1.666e-5;
//!     PAR_2 = 0.1;
//!     PAR_3 = 0.1;
//!   }
//!   output PAR_4 = phi.PAR_4;
//! }
//! ```

mod lexer;
mod parser;
mod printer;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use parser::parse;
pub use printer::{format_number, print, print_expr};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub origin: String,
    pub text: String,
}

impl SourceFile {
    pub fn new(origin: &str, text: &str) -> Self {
        SourceFile {
            origin: origin.to_string(),
            text: text.to_string(),
        }
    }

    /// Reads a file; failures come back as a diagnostic at the offending position.
    pub fn read(path: &Path) -> Result<SourceFile, Diagnostic> {
        let origin = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|e| {
            Diagnostic::error(format!("cannot read file: {e}"), Pos { line: 1, column: 1 }).with_origin(&origin)
        })?;
        match String::from_utf8(bytes) {
            Ok(text) => Ok(SourceFile { origin, text }),
            Err(e) => {
                let valid = &e.as_bytes()[..e.utf8_error().valid_up_to()];
                let valid = std::str::from_utf8(valid).expect("prefix is valid");
                let line = valid.matches('\n').count() + 1;
                let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
                Err(Diagnostic::error("invalid UTF-8", Pos { line, column }).with_origin(&origin))
            }
        }
    }
}

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub origin: String,
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, pos: Pos) -> Self {
        Diagnostic {
            origin: String::new(),
            severity: Severity::Error,
            message: message.into(),
            line: pos.line,
            column: pos.column,
        }
    }

    pub fn with_origin(mut self, origin: &str) -> Self {
        self.origin = origin.to_string();
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.origin.is_empty() {
            write!(f, "{}:", self.origin)?;
        }
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.severity, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn missing_file_diagnostic() {
        let d = SourceFile::read(Path::new("/nonexistent/missing.rvm")).unwrap_err();
        assert_eq!((d.line, d.column), (1, 1));
        assert!(d.to_string().starts_with("/nonexistent/missing.rvm:1:1: error: cannot read file"));
    }

    #[test]
    fn invalid_utf8_position() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"workflow \"w\" {\n  # \xff\n}").unwrap();
        let d = SourceFile::read(f.path()).unwrap_err();
        assert_eq!((d.line, d.column), (2, 5));
    }
}
