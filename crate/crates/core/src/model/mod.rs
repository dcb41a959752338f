//! Fixed-width values, header layouts and the internet checksum.

mod checksum;
mod layout;
mod value;

use thiserror::Error;

pub use checksum::{internet_checksum, ones_complement_sum, verifies};
pub use layout::{
    check_identifier, is_reserved, FieldDecl, HeaderLayout, RingBufferDecl, SharedVariableDecl,
    RESERVED, RESERVED_PREFIX,
};
pub use value::{cast_value, wrap_add, wrap_sub, UValue, UWidth};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("width {0} is not one of 8, 16, 32, 64")]
    InvalidWidth(u32),
    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: UWidth, found: UWidth },
    #[error("{magnitude} does not fit in {width}")]
    OutOfRange { width: UWidth, magnitude: u64 },
    #[error("`{0}` is not a valid identifier")]
    InvalidIdentifier(String),
    #[error("`{0}` is reserved")]
    Reserved(String),
    #[error("layout `{0}` has no fields")]
    EmptyLayout(String),
    #[error("duplicate field `{0}`")]
    DuplicateField(String),
    #[error("missing value for field `{0}`")]
    MissingField(String),
    #[error("need {needed} bytes, only {available} available")]
    TooShort { needed: usize, available: usize },
    #[error("ring buffer `{0}` needs a positive capacity")]
    ZeroCapacity(String),
}
