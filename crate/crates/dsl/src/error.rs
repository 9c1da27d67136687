use std::fmt;

use jetforms_core::JetError;

/// Source position, 1-based. Positions never take part in equality so
/// that reparsed trees compare structurally.
#[derive(Clone, Copy, Debug, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    UndeclaredIdentifier,
    IndexOutOfRange,
    OrderOverflow,
    DimensionMismatch,
    /// Declaration problems: duplicates, bad shapes, reserved words.
    Declaration,
    /// Failure reported by the symbolic engine while elaborating.
    Engine,
}

/// Diagnostic with the position it refers to.
#[derive(Clone, Debug, PartialEq)]
pub struct DslError {
    pub kind: ErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
    /// Token descriptions the parser would have accepted.
    pub expected: Vec<String>,
}

impl DslError {
    pub fn new(kind: ErrorKind, pos: Pos, message: impl Into<String>) -> Self {
        DslError {
            kind,
            line: pos.line,
            col: pos.col,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    pub fn syntax(pos: Pos, message: impl Into<String>, expected: &[&str]) -> Self {
        let mut e = Self::new(ErrorKind::Syntax, pos, message);
        e.expected = expected.iter().map(|s| s.to_string()).collect();
        e
    }

    pub fn engine(pos: Pos, err: JetError) -> Self {
        Self::new(ErrorKind::Engine, pos, err.to_string())
    }

    pub fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for DslError {}
