//! Flow selectors and the per-stack parser chains built from them.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::FlowProcessor;
use crate::model::{check_identifier, HeaderLayout, UValue, UWidth};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProtocolStack {
    #[serde(rename = "IPV4_UDP")]
    Ipv4Udp,
    #[serde(rename = "IPV4_TCP")]
    Ipv4Tcp,
}

impl ProtocolStack {
    pub const ALL: [ProtocolStack; 2] = [ProtocolStack::Ipv4Udp, ProtocolStack::Ipv4Tcp];

    /// `IPV4_UDP` style constant.
    pub fn constant(self) -> &'static str {
        match self {
            ProtocolStack::Ipv4Udp => "IPV4_UDP",
            ProtocolStack::Ipv4Tcp => "IPV4_TCP",
        }
    }

    pub fn l4_header(self) -> &'static str {
        match self {
            ProtocolStack::Ipv4Udp => "udp",
            ProtocolStack::Ipv4Tcp => "tcp",
        }
    }

    pub fn ip_protocol(self) -> u8 {
        match self {
            ProtocolStack::Ipv4Udp => 17,
            ProtocolStack::Ipv4Tcp => 6,
        }
    }
}

impl fmt::Display for ProtocolStack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.constant())
    }
}

/// A field of a standard header that criteria may test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StandardField {
    pub header: &'static str,
    pub name: &'static str,
    /// Width of the value type used for criteria.
    pub width: UWidth,
    /// Width on the wire; differs from `width` only for 48-bit MAC addresses.
    pub wire_bits: u32,
}

impl StandardField {
    pub fn qualified(&self) -> String {
        format!("{}.{}", self.header, self.name)
    }

    fn available_in(&self, stack: ProtocolStack) -> bool {
        match self.header {
            "eth" | "ipv4" => true,
            other => other == stack.l4_header(),
        }
    }
}

const fn sf(header: &'static str, name: &'static str, width: UWidth, wire_bits: u32) -> StandardField {
    StandardField {
        header,
        name,
        width,
        wire_bits,
    }
}

pub const STANDARD_FIELDS: &[StandardField] = &[
    sf("eth", "dstAddr", UWidth::U64, 48),
    sf("eth", "srcAddr", UWidth::U64, 48),
    sf("eth", "etherType", UWidth::U16, 16),
    sf("ipv4", "srcAddr", UWidth::U32, 32),
    sf("ipv4", "dstAddr", UWidth::U32, 32),
    sf("ipv4", "protocol", UWidth::U8, 8),
    sf("ipv4", "totalLen", UWidth::U16, 16),
    sf("ipv4", "ttl", UWidth::U8, 8),
    sf("udp", "srcPort", UWidth::U16, 16),
    sf("udp", "dstPort", UWidth::U16, 16),
    sf("udp", "len", UWidth::U16, 16),
    sf("tcp", "srcPort", UWidth::U16, 16),
    sf("tcp", "dstPort", UWidth::U16, 16),
];

pub fn standard_field(qualified: &str) -> Option<&'static StandardField> {
    let (header, name) = qualified.split_once('.')?;
    STANDARD_FIELDS
        .iter()
        .find(|f| f.header == header && f.name == name)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectorError {
    #[error("selector `{selector}`: unknown field `{field}`")]
    UndeclaredName { selector: String, field: String },
    #[error("selector `{selector}`: `{field}` is {expected}, value is {found}")]
    WidthMismatch {
        selector: String,
        field: String,
        expected: UWidth,
        found: UWidth,
    },
    #[error("selector `{selector}`: `{field}` is a payload field but no lookahead layout is given")]
    MissingLookahead { selector: String, field: String },
    #[error("selector `{0}` has no criteria")]
    EmptyCriteria(String),
    #[error("duplicate selector name `{0}`")]
    DuplicateName(String),
    #[error("`{0}` cannot name a selector: {1}")]
    InvalidName(String, String),
}

/// Unresolved criterion as written by the user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Criterion {
    pub field: String,
    pub value: UValue,
}

impl Criterion {
    pub fn new(field: impl Into<String>, value: UValue) -> Self {
        Criterion {
            field: field.into(),
            value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldRef {
    Standard(&'static StandardField),
    /// Field of the selector's lookahead layout.
    Lookahead(String),
}

impl fmt::Display for FieldRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldRef::Standard(s) => write!(f, "{}.{}", s.header, s.name),
            FieldRef::Lookahead(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedCriterion {
    pub field: FieldRef,
    pub value: UValue,
}

/// Binds packets matching every criterion (conjunction) to a processor.
#[derive(Clone, Debug)]
pub struct FlowSelector {
    name: String,
    stack: ProtocolStack,
    criteria: Vec<ResolvedCriterion>,
    lookahead: Option<HeaderLayout>,
    processor: Arc<FlowProcessor>,
}

impl FlowSelector {
    pub fn new(
        name: impl Into<String>,
        stack: ProtocolStack,
        criteria: Vec<Criterion>,
        lookahead: Option<HeaderLayout>,
        processor: Arc<FlowProcessor>,
    ) -> Result<Self, SelectorError> {
        let name = name.into();
        check_identifier(&name).map_err(|e| SelectorError::InvalidName(name.clone(), e.to_string()))?;
        if criteria.is_empty() {
            return Err(SelectorError::EmptyCriteria(name));
        }
        let resolved = criteria
            .into_iter()
            .map(|c| resolve(&name, stack, lookahead.as_ref(), c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FlowSelector {
            name,
            stack,
            criteria: resolved,
            lookahead,
            processor,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stack(&self) -> ProtocolStack {
        self.stack
    }

    pub fn criteria(&self) -> &[ResolvedCriterion] {
        &self.criteria
    }

    pub fn lookahead(&self) -> Option<&HeaderLayout> {
        self.lookahead.as_ref()
    }

    pub fn processor(&self) -> &Arc<FlowProcessor> {
        &self.processor
    }
}

fn resolve(
    selector: &str,
    stack: ProtocolStack,
    lookahead: Option<&HeaderLayout>,
    c: Criterion,
) -> Result<ResolvedCriterion, SelectorError> {
    let undeclared = || SelectorError::UndeclaredName {
        selector: selector.to_string(),
        field: c.field.clone(),
    };
    let check_width = |expected: UWidth| {
        if c.value.width() != expected {
            return Err(SelectorError::WidthMismatch {
                selector: selector.to_string(),
                field: c.field.clone(),
                expected,
                found: c.value.width(),
            });
        }
        Ok(())
    };

    if let Some(std) = standard_field(&c.field) {
        if !std.available_in(stack) {
            return Err(undeclared());
        }
        check_width(std.width)?;
        if std.wire_bits < 64 && c.value.magnitude() >> std.wire_bits != 0 {
            return Err(SelectorError::WidthMismatch {
                selector: selector.to_string(),
                field: c.field.clone(),
                expected: std.width,
                found: c.value.width(),
            });
        }
        return Ok(ResolvedCriterion {
            field: FieldRef::Standard(std),
            value: c.value,
        });
    }

    // Payload field: bare name, or qualified with the lookahead layout name.
    let bare = match c.field.split_once('.') {
        None => c.field.as_str(),
        Some((layout, name)) if lookahead.is_some_and(|l| l.name() == layout) => name,
        Some(_) => return Err(undeclared()),
    };
    let Some(layout) = lookahead else {
        return Err(SelectorError::MissingLookahead {
            selector: selector.to_string(),
            field: c.field.clone(),
        });
    };
    let decl = layout.field(bare).ok_or_else(undeclared)?;
    check_width(decl.width())?;
    Ok(ResolvedCriterion {
        field: FieldRef::Lookahead(bare.to_string()),
        value: c.value,
    })
}

/// Selectors of one protocol stack in registration order; the first
/// matching link wins and the last miss falls through to `accept`.
#[derive(Clone, Debug)]
pub struct ParserChain {
    pub stack: ProtocolStack,
    pub links: Vec<FlowSelector>,
}

/// Partitions selectors by stack, keeping registration order. Stacks without
/// selectors are absent from the map.
pub fn build_chains(
    selectors: &[FlowSelector],
) -> Result<BTreeMap<ProtocolStack, ParserChain>, SelectorError> {
    let mut seen = HashSet::new();
    let mut chains: BTreeMap<ProtocolStack, ParserChain> = BTreeMap::new();
    for s in selectors {
        if !seen.insert(s.name()) {
            return Err(SelectorError::DuplicateName(s.name().to_string()));
        }
        chains
            .entry(s.stack())
            .or_insert_with(|| ParserChain {
                stack: s.stack(),
                links: Vec::new(),
            })
            .links
            .push(s.clone());
    }
    Ok(chains)
}
