//! JSON program documents.
//!
//! Loading replays every declaration and command through the builder, so the
//! checks are the same ones a library user gets. Errors carry the JSON path of
//! the offending node, e.g. `processors[0].body[3].then[1]`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{BlockId, Command, FlowProcessor, Hint, Operand, SemanticError, VarRef};
use crate::model::{FieldDecl, HeaderLayout, ModelError, RingBufferDecl, SharedVariableDecl, UValue, UWidth};
use crate::selector::{Criterion, FlowSelector, ProtocolStack, SelectorError};
use crate::solution::{CodegenConfig, Solution, TemplateId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramDoc {
    #[serde(default)]
    pub layouts: Vec<LayoutDoc>,
    #[serde(default)]
    pub processors: Vec<ProcessorDoc>,
    #[serde(default)]
    pub selectors: Vec<SelectorDoc>,
    #[serde(default)]
    pub template: TemplateId,
    #[serde(default)]
    pub options: OptionsDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutDoc {
    pub name: String,
    pub fields: Vec<FieldDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub name: String,
    pub width: UWidth,
    /// Marks a u8 local as boolean.
    #[serde(default, skip_serializing_if = "is_false")]
    pub bool: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharedDoc {
    pub name: String,
    pub initial: ConstDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingDoc {
    pub name: String,
    pub width: UWidth,
    pub capacity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessorDoc {
    pub name: String,
    /// Layout names from `layouts`.
    pub input: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub locals: Vec<FieldDoc>,
    #[serde(default)]
    pub shared: Vec<SharedDoc>,
    #[serde(default)]
    pub rings: Vec<RingDoc>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub truncate_payload: bool,
    #[serde(default)]
    pub body: Vec<StmtDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorDoc {
    pub name: String,
    pub stack: ProtocolStack,
    pub criteria: Vec<CriterionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lookahead: Option<String>,
    pub processor: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionDoc {
    pub field: String,
    pub value: ConstDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsDoc {
    #[serde(default = "default_true")]
    pub emit_combined: bool,
    #[serde(default = "default_indent")]
    pub indent: usize,
}

fn default_true() -> bool {
    true
}

fn default_indent() -> usize {
    4
}

impl Default for OptionsDoc {
    fn default() -> Self {
        OptionsDoc {
            emit_combined: true,
            indent: 4,
        }
    }
}

/// `{"u8": 71}`; the number may also be a string, decimal or `0x` hex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstDoc(pub UValue);

impl Serialize for ConstDoc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = BTreeMap::new();
        m.insert(format!("u{}", self.0.width().bits()), self.0.magnitude());
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConstDoc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = BTreeMap::<String, Number>::deserialize(d)?;
        let mut it = m.into_iter();
        let (Some((key, Number(n))), None) = (it.next(), it.next()) else {
            return Err(de::Error::custom("constant must have exactly one key: u8, u16, u32 or u64"));
        };
        let width = key
            .strip_prefix('u')
            .and_then(|b| b.parse::<u32>().ok())
            .and_then(|b| UWidth::from_bits(b).ok())
            .ok_or_else(|| de::Error::custom(format!("unknown constant width `{key}`")))?;
        UValue::new(width, n).map(ConstDoc).map_err(de::Error::custom)
    }
}

/// Unsigned integer given as a JSON number or as a decimal / `0x` hex string.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Number(pub u64);

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d).map_err(|_| de::Error::custom("expected an unsigned integer or a numeric string"))? {
            Raw::N(n) => Ok(Number(n)),
            Raw::S(s) => parse_number(&s).map(Number).map_err(de::Error::custom),
        }
    }
}

pub(crate) fn parse_number(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let r = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => t.replace('_', "").parse::<u64>(),
    };
    r.map_err(|_| format!("`{s}` is not an unsigned integer"))
}

/// Variable reference (`"local.x"`) or constant (`{"u8": 1}`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperandDoc {
    Var(String),
    Const(ConstDoc),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HintDoc {
    #[default]
    IfElse,
    Table,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum StmtDoc {
    AssignConst {
        target: String,
        value: ConstDoc,
    },
    Assign {
        target: String,
        source: OperandDoc,
    },
    Cast {
        target: String,
        source: OperandDoc,
    },
    Add {
        target: String,
        lhs: OperandDoc,
        rhs: OperandDoc,
    },
    Sub {
        target: String,
        lhs: OperandDoc,
        rhs: OperandDoc,
    },
    Equals {
        target: String,
        lhs: OperandDoc,
        rhs: OperandDoc,
        #[serde(default)]
        hint: HintDoc,
    },
    Greater {
        target: String,
        lhs: OperandDoc,
        rhs: OperandDoc,
    },
    Rand {
        target: String,
    },
    RingPush {
        ring: String,
        source: OperandDoc,
    },
    RingReadHead {
        ring: String,
        target: String,
    },
    SendBack,
    Forward {
        port: u16,
    },
    If {
        cond: String,
        then: Vec<StmtDoc>,
        #[serde(default, rename = "else", skip_serializing_if = "Option::is_none")]
        else_: Option<Vec<StmtDoc>>,
    },
    Switch {
        selector: OperandDoc,
        cases: Vec<CaseDoc>,
    },
    Atomic {
        body: Vec<StmtDoc>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseDoc {
    pub value: ConstDoc,
    pub body: Vec<StmtDoc>,
}

#[derive(Debug, Error)]
pub enum ProgramError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Malformed JSON or a document that does not fit the schema.
    #[error("error[Schema] at {path}: {message}")]
    Schema { path: String, message: String },
    /// Well-formed document rejected by a semantic check.
    #[error("error[{kind}] at {path}: {message}")]
    Semantic {
        kind: String,
        path: String,
        message: String,
    },
}

impl ProgramError {
    fn semantic(kind: impl fmt::Display, path: impl Into<String>, message: impl Into<String>) -> Self {
        ProgramError::Semantic {
            kind: kind.to_string(),
            path: path.into(),
            message: message.into(),
        }
    }

    fn from_model(path: impl Into<String>, e: ModelError) -> Self {
        let kind = match &e {
            ModelError::Reserved(_) | ModelError::InvalidIdentifier(_) => "ReservedName",
            ModelError::DuplicateField(_) => "DuplicateName",
            ModelError::WidthMismatch { .. } => "WidthMismatch",
            ModelError::MissingField(_) => "UndeclaredName",
            _ => {
                return ProgramError::Schema {
                    path: path.into(),
                    message: e.to_string(),
                }
            }
        };
        ProgramError::semantic(kind, path, e.to_string())
    }

    fn from_selector(path: impl Into<String>, e: SelectorError) -> Self {
        let kind = match &e {
            SelectorError::UndeclaredName { .. } => "UndeclaredName",
            SelectorError::WidthMismatch { .. } => "WidthMismatch",
            SelectorError::MissingLookahead { .. } => "MissingLookahead",
            SelectorError::EmptyCriteria(_) => "EmptyCriteria",
            SelectorError::DuplicateName(_) => "DuplicateName",
            SelectorError::InvalidName(..) => "ReservedName",
        };
        ProgramError::semantic(kind, path, e.to_string())
    }

    fn from_semantic(path: impl Into<String>, e: SemanticError) -> Self {
        ProgramError::semantic(e.kind, path, e.message)
    }

    /// Process exit status for this error: 1 for I/O and schema, 2 for
    /// semantic problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProgramError::Io { .. } | ProgramError::Schema { .. } => 1,
            ProgramError::Semantic { .. } => 2,
        }
    }

    pub fn path(&self) -> Option<&str> {
        match self {
            ProgramError::Io { .. } => None,
            ProgramError::Schema { path, .. } | ProgramError::Semantic { path, .. } => Some(path),
        }
    }
}

impl ProgramDoc {
    pub fn from_json(text: &str) -> Result<ProgramDoc, ProgramError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| ProgramError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<ProgramDoc, ProgramError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProgramError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ProgramDoc::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("program documents always serialize");
        s.push('\n');
        s
    }

    /// Replays the document through the builder.
    pub fn build(&self) -> Result<Solution, ProgramError> {
        let mut layouts: BTreeMap<&str, HeaderLayout> = BTreeMap::new();
        for (i, l) in self.layouts.iter().enumerate() {
            let path = format!("layouts[{i}]");
            let fields = l
                .fields
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    FieldDecl::new(&f.name, f.width)
                        .map_err(|e| ProgramError::from_model(format!("{path}.fields[{j}]"), e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let layout = HeaderLayout::new(&l.name, fields).map_err(|e| ProgramError::from_model(&path, e))?;
            if layouts.insert(&l.name, layout).is_some() {
                return Err(ProgramError::semantic(
                    "DuplicateName",
                    format!("{path}.name"),
                    format!("layout `{}` is declared twice", l.name),
                ));
            }
        }
        let layout = |name: &str, path: String| {
            layouts
                .get(name)
                .cloned()
                .ok_or_else(|| ProgramError::semantic("UndeclaredName", path, format!("no layout named `{name}`")))
        };

        let mut processors: BTreeMap<&str, Arc<FlowProcessor>> = BTreeMap::new();
        for (i, p) in self.processors.iter().enumerate() {
            let path = format!("processors[{i}]");
            let proc_ = build_processor(p, &path, &layout)?;
            if processors.insert(&p.name, Arc::new(proc_)).is_some() {
                return Err(ProgramError::semantic(
                    "DuplicateName",
                    format!("{path}.name"),
                    format!("processor `{}` is declared twice", p.name),
                ));
            }
        }

        let mut selectors = Vec::new();
        for (i, s) in self.selectors.iter().enumerate() {
            let path = format!("selectors[{i}]");
            let processor = processors.get(s.processor.as_str()).cloned().ok_or_else(|| {
                ProgramError::semantic(
                    "UndeclaredName",
                    format!("{path}.processor"),
                    format!("no processor named `{}`", s.processor),
                )
            })?;
            let lookahead = s
                .lookahead
                .as_deref()
                .map(|n| layout(n, format!("{path}.lookahead")))
                .transpose()?;
            let criteria = s.criteria.iter().map(|c| Criterion::new(&c.field, c.value.0)).collect();
            let sel = FlowSelector::new(&s.name, s.stack, criteria, lookahead, processor)
                .map_err(|e| ProgramError::from_selector(&path, e))?;
            if selectors.iter().any(|o: &FlowSelector| o.name() == sel.name()) {
                return Err(ProgramError::semantic(
                    "DuplicateName",
                    format!("{path}.name"),
                    format!("selector `{}` is declared twice", s.name),
                ));
            }
            selectors.push(sel);
        }

        let options = CodegenConfig {
            out_dir: None,
            emit_combined: self.options.emit_combined,
            indent: self.options.indent,
        };
        Solution::new(selectors, self.template, options).map_err(|e| match e {
            crate::Error::Semantic(e) => ProgramError::from_semantic("processors", e),
            crate::Error::Selector(e) => ProgramError::from_selector("selectors", e),
            other => ProgramError::semantic("Solution", "", other.to_string()),
        })
    }
}

fn build_processor(
    p: &ProcessorDoc,
    path: &str,
    layout: &dyn Fn(&str, String) -> Result<HeaderLayout, ProgramError>,
) -> Result<FlowProcessor, ProgramError> {
    let input = layout(&p.input, format!("{path}.input"))?;
    let mut b = FlowProcessor::builder(&p.name, input).truncate_payload(p.truncate_payload);
    if let Some(out) = &p.output {
        b = b.output(layout(out, format!("{path}.output"))?);
    }
    for (j, l) in p.locals.iter().enumerate() {
        let lp = format!("{path}.locals[{j}]");
        let decl = if l.bool {
            if l.width != UWidth::U8 {
                return Err(ProgramError::semantic("WidthMismatch", lp, "boolean locals are u8"));
            }
            FieldDecl::boolean(&l.name)
        } else {
            FieldDecl::new(&l.name, l.width)
        };
        b = b.local(decl.map_err(|e| ProgramError::from_model(lp, e))?);
    }
    for (j, s) in p.shared.iter().enumerate() {
        let decl = SharedVariableDecl::new(&s.name, s.initial.0)
            .map_err(|e| ProgramError::from_model(format!("{path}.shared[{j}]"), e))?;
        b = b.shared(decl);
    }
    for (j, r) in p.rings.iter().enumerate() {
        let decl = RingBufferDecl::new(&r.name, r.width, r.capacity)
            .map_err(|e| ProgramError::from_model(format!("{path}.rings[{j}]"), e))?;
        b = b.ring(decl);
    }
    let mut proc_ = b.build().map_err(|e| ProgramError::from_semantic(path, e))?;
    replay(&mut proc_, BlockId::BODY, &p.body, &format!("{path}.body"))?;
    proc_
        .validate_complete()
        .map_err(|e| ProgramError::from_semantic(format!("{path}.body"), e))?;
    Ok(proc_)
}

fn var(s: &str, path: &str) -> Result<VarRef, ProgramError> {
    VarRef::parse(s).ok_or_else(|| ProgramError::Schema {
        path: path.to_string(),
        message: format!("`{s}` is not a variable reference like `local.x`"),
    })
}

fn operand(o: &OperandDoc, path: &str) -> Result<Operand, ProgramError> {
    match o {
        OperandDoc::Var(s) => var(s, path).map(Operand::Var),
        OperandDoc::Const(c) => Ok(Operand::Const(c.0)),
    }
}

fn to_command(s: &StmtDoc, path: &str) -> Result<Option<Command>, ProgramError> {
    let t = |name: &str, field: &str| var(name, &format!("{path}.{field}"));
    let o = |od: &OperandDoc, field: &str| operand(od, &format!("{path}.{field}"));
    Ok(Some(match s {
        StmtDoc::AssignConst { target, value } => Command::assign_const(t(target, "target")?, value.0),
        StmtDoc::Assign { target, source } => Command::assign(t(target, "target")?, o(source, "source")?),
        StmtDoc::Cast { target, source } => Command::cast(t(target, "target")?, o(source, "source")?),
        StmtDoc::Add { target, lhs, rhs } => Command::add(t(target, "target")?, o(lhs, "lhs")?, o(rhs, "rhs")?),
        StmtDoc::Sub { target, lhs, rhs } => Command::sub(t(target, "target")?, o(lhs, "lhs")?, o(rhs, "rhs")?),
        StmtDoc::Equals { target, lhs, rhs, hint } => Command::equals_hinted(
            t(target, "target")?,
            o(lhs, "lhs")?,
            o(rhs, "rhs")?,
            match hint {
                HintDoc::IfElse => Hint::IfElse,
                HintDoc::Table => Hint::Table,
            },
        ),
        StmtDoc::Greater { target, lhs, rhs } => {
            Command::greater(t(target, "target")?, o(lhs, "lhs")?, o(rhs, "rhs")?)
        }
        StmtDoc::Rand { target } => Command::rand(t(target, "target")?),
        StmtDoc::RingPush { ring, source } => Command::ring_push(ring, o(source, "source")?),
        StmtDoc::RingReadHead { ring, target } => Command::ring_read_head(ring, t(target, "target")?),
        StmtDoc::SendBack => Command::send_back(),
        StmtDoc::Forward { port } => Command::forward(*port),
        StmtDoc::If { .. } | StmtDoc::Switch { .. } | StmtDoc::Atomic { .. } => return Ok(None),
    }))
}

fn replay(p: &mut FlowProcessor, block: BlockId, body: &[StmtDoc], path: &str) -> Result<(), ProgramError> {
    for (i, stmt) in body.iter().enumerate() {
        let here = format!("{path}[{i}]");
        let sem = |e| ProgramError::from_semantic(&here, e);
        if let Some(cmd) = to_command(stmt, &here)? {
            p.push_command(block, cmd).map_err(sem)?;
            continue;
        }
        match stmt {
            StmtDoc::If { cond, then, else_ } => {
                let then_id = p.open_if(block, var(cond, &format!("{here}.cond"))?).map_err(sem)?;
                replay(p, then_id, then, &format!("{here}.then"))?;
                let last = match else_ {
                    Some(els) => {
                        let else_id = p
                            .open_else(then_id)
                            .map_err(|e| ProgramError::from_semantic(format!("{here}.else"), e))?;
                        replay(p, else_id, els, &format!("{here}.else"))?;
                        else_id
                    }
                    None => then_id,
                };
                p.end_if(last).map_err(sem)?;
            }
            StmtDoc::Switch { selector, cases } => {
                let sel = operand(selector, &format!("{here}.selector"))?;
                let mut scope = p.open_switch(block, sel).map_err(sem)?;
                for (j, c) in cases.iter().enumerate() {
                    let cp = format!("{here}.cases[{j}]");
                    scope = p
                        .open_case(scope, c.value.0)
                        .map_err(|e| ProgramError::from_semantic(&cp, e))?;
                    replay(p, scope, &c.body, &format!("{cp}.body"))?;
                }
                p.end_switch(scope).map_err(sem)?;
            }
            StmtDoc::Atomic { body } => {
                let id = p.open_atomic(block).map_err(sem)?;
                replay(p, id, body, &format!("{here}.body"))?;
                p.end_atomic(id).map_err(sem)?;
            }
            _ => unreachable!("plain commands handled above"),
        }
    }
    Ok(())
}

/// Loads and builds a program file.
pub fn load_program(path: &Path) -> Result<Solution, ProgramError> {
    ProgramDoc::from_path(path)?.build()
}
