use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SemanticErrorKind {
    UndeclaredName,
    WidthMismatch,
    DuplicateName,
    WriteToInput,
    OutputUndeclared,
    NotBoolean,
    OpenScope,
    AtomicNesting,
    ReservedName,
}

impl fmt::Display for SemanticErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Raised by the builder call that introduced the problem. `site` is the
/// ordinal of that call within its processor (0 is construction).
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at call #{site}: {message}")]
pub struct SemanticError {
    pub kind: SemanticErrorKind,
    pub message: String,
    pub site: u32,
}

impl SemanticError {
    pub(crate) fn new(kind: SemanticErrorKind, site: u32, message: impl Into<String>) -> Self {
        SemanticError {
            kind,
            message: message.into(),
            site,
        }
    }
}
