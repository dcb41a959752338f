use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::{ModelError, UValue, UWidth};

/// P4-16 keywords and the names the shipped templates declare.
pub const RESERVED: &[&str] = &[
    // P4-16 keywords
    "abstract", "action", "actions", "apply", "bit", "bool", "const", "control", "default",
    "else", "entries", "enum", "error", "exit", "extern", "false", "header", "header_union",
    "if", "in", "inout", "int", "key", "list", "match_kind", "out", "package", "parser",
    "priority", "return", "select", "size", "state", "string", "struct", "switch", "table",
    "this", "transition", "true", "tuple", "type", "typedef", "varbit", "verify", "void",
    "value_set", "exact", "ternary", "lpm",
    // template contract
    "hdr", "meta", "standard_metadata", "packet", "headers", "metadata", "eth", "ipv4", "udp",
    "tcp", "ethernet_t", "ipv4_t", "udp_t", "tcp_t", "accept", "reject", "start", "main",
    "random", "truncate", "register", "lookahead", "extract", "emit", "mark_to_drop",
    "ATOMIC_BEGIN", "ATOMIC_END",
];

/// Every identifier with this prefix belongs to the template and the generator.
pub const RESERVED_PREFIX: &str = "parrot_";

pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
        || name.starts_with(RESERVED_PREFIX)
        || name.starts_with("PARROT_")
}

/// Checks `[A-Za-z_][A-Za-z0-9_]*` and the reserved list.
pub fn check_identifier(name: &str) -> Result<(), ModelError> {
    let mut chars = name.chars();
    let head_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    if !head_ok || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(ModelError::InvalidIdentifier(name.to_string()));
    }
    if is_reserved(name) {
        return Err(ModelError::Reserved(name.to_string()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldDecl {
    name: String,
    width: UWidth,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    boolean: bool,
}

impl FieldDecl {
    pub fn new(name: impl Into<String>, width: UWidth) -> Result<Self, ModelError> {
        let name = name.into();
        check_identifier(&name)?;
        Ok(FieldDecl {
            name,
            width,
            boolean: false,
        })
    }

    /// A `u8` restricted to `{0, 1}`. Only comparison results and other
    /// booleans may be stored in it.
    pub fn boolean(name: impl Into<String>) -> Result<Self, ModelError> {
        let mut decl = FieldDecl::new(name, UWidth::U8)?;
        decl.boolean = true;
        Ok(decl)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> UWidth {
        self.width
    }

    pub fn is_boolean(&self) -> bool {
        self.boolean
    }
}

/// Ordered, byte-aligned field list describing a header or a payload region.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeaderLayout {
    name: String,
    fields: Vec<FieldDecl>,
}

impl HeaderLayout {
    pub fn new(name: impl Into<String>, fields: Vec<FieldDecl>) -> Result<Self, ModelError> {
        let name = name.into();
        check_identifier(&name)?;
        if fields.is_empty() {
            return Err(ModelError::EmptyLayout(name));
        }
        let mut seen = HashSet::new();
        for f in &fields {
            if !seen.insert(f.name()) {
                return Err(ModelError::DuplicateField(f.name().to_string()));
            }
        }
        Ok(HeaderLayout { name, fields })
    }

    /// Shorthand for layouts of plain unsigned fields.
    pub fn of(name: impl Into<String>, fields: &[(&str, UWidth)]) -> Result<Self, ModelError> {
        let fields = fields
            .iter()
            .map(|(n, w)| FieldDecl::new(*n, *w))
            .collect::<Result<Vec<_>, _>>()?;
        HeaderLayout::new(name, fields)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fields(&self) -> &[FieldDecl] {
        &self.fields
    }

    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn byte_size(&self) -> usize {
        self.fields.iter().map(|f| f.width.bytes()).sum()
    }

    /// Big-endian, declaration order.
    pub fn serialize(&self, values: &BTreeMap<String, UValue>) -> Result<Vec<u8>, ModelError> {
        let mut out = Vec::with_capacity(self.byte_size());
        for f in &self.fields {
            let v = values
                .get(&f.name)
                .ok_or_else(|| ModelError::MissingField(f.name.clone()))?;
            if v.width() != f.width {
                return Err(ModelError::WidthMismatch {
                    expected: f.width,
                    found: v.width(),
                });
            }
            let be = v.magnitude().to_be_bytes();
            out.extend_from_slice(&be[8 - f.width.bytes()..]);
        }
        Ok(out)
    }

    /// Reads the leading `byte_size()` bytes; anything after them is ignored.
    pub fn deserialize(&self, bytes: &[u8]) -> Result<BTreeMap<String, UValue>, ModelError> {
        let need = self.byte_size();
        if bytes.len() < need {
            return Err(ModelError::TooShort {
                needed: need,
                available: bytes.len(),
            });
        }
        let mut values = BTreeMap::new();
        let mut offset = 0;
        for f in &self.fields {
            let n = f.width.bytes();
            let magnitude = bytes[offset..offset + n]
                .iter()
                .fold(0u64, |acc, b| (acc << 8) | u64::from(*b));
            values.insert(f.name.clone(), UValue::truncating(f.width, magnitude));
            offset += n;
        }
        Ok(values)
    }
}

/// A single persistent register slot shared by all packets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharedVariableDecl {
    name: String,
    initial: UValue,
}

impl SharedVariableDecl {
    pub fn new(name: impl Into<String>, initial: UValue) -> Result<Self, ModelError> {
        let name = name.into();
        check_identifier(&name)?;
        Ok(SharedVariableDecl { name, initial })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> UWidth {
        self.initial.width()
    }

    pub fn initial(&self) -> UValue {
        self.initial
    }
}

/// Fixed-capacity ring of register slots plus a head index register.
/// The head is the next slot to be written.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RingBufferDecl {
    name: String,
    element_width: UWidth,
    capacity: u32,
}

impl RingBufferDecl {
    pub fn new(
        name: impl Into<String>,
        element_width: UWidth,
        capacity: u32,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        check_identifier(&name)?;
        if capacity == 0 {
            return Err(ModelError::ZeroCapacity(name));
        }
        Ok(RingBufferDecl {
            name,
            element_width,
            capacity,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn element_width(&self) -> UWidth {
        self.element_width
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }
}
