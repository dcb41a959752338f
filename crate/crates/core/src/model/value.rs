use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Width of an unsigned value. Only byte-aligned power-of-two widths exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum UWidth {
    U8,
    U16,
    U32,
    U64,
}

impl UWidth {
    pub const ALL: [UWidth; 4] = [UWidth::U8, UWidth::U16, UWidth::U32, UWidth::U64];

    pub fn from_bits(bits: u32) -> Result<Self, ModelError> {
        match bits {
            8 => Ok(UWidth::U8),
            16 => Ok(UWidth::U16),
            32 => Ok(UWidth::U32),
            64 => Ok(UWidth::U64),
            other => Err(ModelError::InvalidWidth(other)),
        }
    }

    pub const fn bits(self) -> u32 {
        match self {
            UWidth::U8 => 8,
            UWidth::U16 => 16,
            UWidth::U32 => 32,
            UWidth::U64 => 64,
        }
    }

    pub const fn bytes(self) -> usize {
        (self.bits() / 8) as usize
    }

    /// Largest representable magnitude.
    pub const fn max(self) -> u64 {
        match self {
            UWidth::U64 => u64::MAX,
            w => (1u64 << w.bits()) - 1,
        }
    }
}

impl TryFrom<u32> for UWidth {
    type Error = ModelError;

    fn try_from(bits: u32) -> Result<Self, Self::Error> {
        UWidth::from_bits(bits)
    }
}

impl From<UWidth> for u32 {
    fn from(w: UWidth) -> u32 {
        w.bits()
    }
}

impl fmt::Display for UWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.bits())
    }
}

/// A fixed-width unsigned integer. The magnitude never exceeds `width.max()`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UValue {
    width: UWidth,
    magnitude: u64,
}

impl UValue {
    /// Rejects magnitudes that do not fit in `width`.
    pub fn new(width: UWidth, magnitude: u64) -> Result<Self, ModelError> {
        if magnitude > width.max() {
            return Err(ModelError::OutOfRange { width, magnitude });
        }
        Ok(UValue { width, magnitude })
    }

    /// Keeps the low-order `width` bits of `magnitude`.
    pub const fn truncating(width: UWidth, magnitude: u64) -> Self {
        UValue {
            width,
            magnitude: magnitude & width.max(),
        }
    }

    pub const fn zero(width: UWidth) -> Self {
        UValue { width, magnitude: 0 }
    }

    pub const fn u8(v: u8) -> Self {
        UValue {
            width: UWidth::U8,
            magnitude: v as u64,
        }
    }

    pub const fn u16(v: u16) -> Self {
        UValue {
            width: UWidth::U16,
            magnitude: v as u64,
        }
    }

    pub const fn u32(v: u32) -> Self {
        UValue {
            width: UWidth::U32,
            magnitude: v as u64,
        }
    }

    pub const fn u64(v: u64) -> Self {
        UValue {
            width: UWidth::U64,
            magnitude: v,
        }
    }

    pub const fn width(self) -> UWidth {
        self.width
    }

    pub const fn magnitude(self) -> u64 {
        self.magnitude
    }

    pub fn is_zero(self) -> bool {
        self.magnitude == 0
    }
}

impl fmt::Display for UValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.width, self.magnitude)
    }
}

fn same_width(a: UValue, b: UValue) -> Result<UWidth, ModelError> {
    if a.width != b.width {
        return Err(ModelError::WidthMismatch {
            expected: a.width,
            found: b.width,
        });
    }
    Ok(a.width)
}

/// `(a + b) mod 2^bits`.
pub fn wrap_add(a: UValue, b: UValue) -> Result<UValue, ModelError> {
    let width = same_width(a, b)?;
    Ok(UValue::truncating(width, a.magnitude.wrapping_add(b.magnitude)))
}

/// `(a - b) mod 2^bits`.
pub fn wrap_sub(a: UValue, b: UValue) -> Result<UValue, ModelError> {
    let width = same_width(a, b)?;
    Ok(UValue::truncating(width, a.magnitude.wrapping_sub(b.magnitude)))
}

/// Zero-extends when widening, keeps the low-order bits when narrowing.
pub fn cast_value(v: UValue, target: UWidth) -> UValue {
    UValue::truncating(target, v.magnitude)
}
