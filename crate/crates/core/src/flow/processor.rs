use std::collections::HashSet;

use serde::Serialize;

use super::command::{Command, Operand, Scope, VarRef};
use super::error::{SemanticError, SemanticErrorKind as Kind};
use crate::model::{
    check_identifier, FieldDecl, HeaderLayout, ModelError, RingBufferDecl, SharedVariableDecl,
    UValue, UWidth,
};

/// Arena index of a block. Two handles refer to the same block iff their ids
/// are equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BlockId(pub(crate) u32);

impl BlockId {
    pub const BODY: BlockId = BlockId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    Body,
    Then,
    Else,
    /// Holds the case blocks of one `Switch` node; never holds commands.
    Switch,
    Case,
    Atomic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockNode {
    pub kind: BlockKind,
    /// Block that receives control back when this scope ends.
    pub parent: Option<BlockId>,
    pub nodes: Vec<Node>,
}

/// A statement tagged with the builder call ordinal that created it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Node {
    pub ordinal: u32,
    pub stmt: Stmt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Stmt {
    Command(Command),
    If {
        cond: VarRef,
        then_block: BlockId,
        else_block: Option<BlockId>,
    },
    Switch {
        selector: Operand,
        container: BlockId,
        cases: Vec<(UValue, BlockId)>,
    },
    Atomic {
        block: BlockId,
    },
}

/// Resolved declaration of a readable/writable name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub width: UWidth,
    pub boolean: bool,
}

/// An offloaded application-layer computation: declared input and optional
/// output payload layouts, locals, shared state and a command tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlowProcessor {
    name: String,
    input: HeaderLayout,
    output: Option<HeaderLayout>,
    locals: Vec<FieldDecl>,
    shared: Vec<SharedVariableDecl>,
    rings: Vec<RingBufferDecl>,
    truncate_payload: bool,
    blocks: Vec<BlockNode>,
    open: Vec<BlockId>,
    #[serde(skip)]
    calls: u32,
}

pub struct FlowProcessorBuilder {
    name: String,
    input: HeaderLayout,
    output: Option<HeaderLayout>,
    locals: Vec<FieldDecl>,
    shared: Vec<SharedVariableDecl>,
    rings: Vec<RingBufferDecl>,
    truncate_payload: bool,
}

impl FlowProcessorBuilder {
    pub fn output(mut self, layout: HeaderLayout) -> Self {
        self.output = Some(layout);
        self
    }

    pub fn local(mut self, decl: FieldDecl) -> Self {
        self.locals.push(decl);
        self
    }

    pub fn shared(mut self, decl: SharedVariableDecl) -> Self {
        self.shared.push(decl);
        self
    }

    pub fn ring(mut self, decl: RingBufferDecl) -> Self {
        self.rings.push(decl);
        self
    }

    /// Drop the payload bytes that follow the input layout.
    pub fn truncate_payload(mut self, on: bool) -> Self {
        self.truncate_payload = on;
        self
    }

    pub fn build(self) -> Result<FlowProcessor, SemanticError> {
        FlowProcessor::new(
            self.name,
            self.input,
            self.output,
            self.locals,
            self.shared,
            self.rings,
        )
        .map(|mut p| {
            p.truncate_payload = self.truncate_payload;
            p
        })
    }
}

impl FlowProcessor {
    pub fn builder(name: impl Into<String>, input: HeaderLayout) -> FlowProcessorBuilder {
        FlowProcessorBuilder {
            name: name.into(),
            input,
            output: None,
            locals: Vec::new(),
            shared: Vec::new(),
            rings: Vec::new(),
            truncate_payload: false,
        }
    }

    pub fn new(
        name: impl Into<String>,
        input: HeaderLayout,
        output: Option<HeaderLayout>,
        locals: Vec<FieldDecl>,
        shared: Vec<SharedVariableDecl>,
        rings: Vec<RingBufferDecl>,
    ) -> Result<Self, SemanticError> {
        let name = name.into();
        check_identifier(&name).map_err(|e| reserved(0, e))?;

        let mut seen = HashSet::new();
        let names = input
            .fields()
            .iter()
            .map(FieldDecl::name)
            .chain(output.iter().flat_map(|o| o.fields().iter().map(FieldDecl::name)))
            .chain(locals.iter().map(FieldDecl::name))
            .chain(shared.iter().map(SharedVariableDecl::name))
            .chain(rings.iter().map(RingBufferDecl::name));
        for n in names {
            if !seen.insert(n) {
                return Err(SemanticError::new(
                    Kind::DuplicateName,
                    0,
                    format!("`{n}` is declared more than once in processor `{name}`"),
                ));
            }
        }

        Ok(FlowProcessor {
            name,
            input,
            output,
            locals,
            shared,
            rings,
            truncate_payload: false,
            blocks: vec![BlockNode {
                kind: BlockKind::Body,
                parent: None,
                nodes: Vec::new(),
            }],
            open: vec![BlockId::BODY],
            calls: 0,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input(&self) -> &HeaderLayout {
        &self.input
    }

    pub fn output(&self) -> Option<&HeaderLayout> {
        self.output.as_ref()
    }

    pub fn locals(&self) -> &[FieldDecl] {
        &self.locals
    }

    pub fn shared(&self) -> &[SharedVariableDecl] {
        &self.shared
    }

    pub fn rings(&self) -> &[RingBufferDecl] {
        &self.rings
    }

    pub fn truncate_payload(&self) -> bool {
        self.truncate_payload
    }

    pub fn block(&self, id: BlockId) -> &BlockNode {
        &self.blocks[id.index()]
    }

    /// Block arena; index 0 is the body.
    pub fn blocks(&self) -> &[BlockNode] {
        &self.blocks
    }

    pub fn body_id(&self) -> BlockId {
        BlockId::BODY
    }

    /// Innermost open scope; the only block that accepts builder calls.
    pub fn current(&self) -> BlockId {
        *self.open.last().expect("body is never closed")
    }

    /// Number of builder calls made so far, failed ones included.
    pub fn call_count(&self) -> u32 {
        self.calls
    }

    pub fn ring(&self, name: &str) -> Option<&RingBufferDecl> {
        self.rings.iter().find(|r| r.name() == name)
    }

    /// Payload size change caused by replacing input with output.
    pub fn size_delta(&self) -> i64 {
        match &self.output {
            Some(out) => out.byte_size() as i64 - self.input.byte_size() as i64,
            None => 0,
        }
    }

    pub fn lookup(&self, var: &VarRef) -> Option<VarInfo> {
        let plain = |f: &FieldDecl| VarInfo {
            width: f.width(),
            boolean: f.is_boolean(),
        };
        match var.scope {
            Scope::Input => self.input.field(&var.name).map(plain),
            Scope::Output => self.output.as_ref()?.field(&var.name).map(plain),
            Scope::Local => self.locals.iter().find(|f| f.name() == var.name).map(plain),
            Scope::Shared => self.shared.iter().find(|s| s.name() == var.name).map(|s| VarInfo {
                width: s.width(),
                boolean: false,
            }),
        }
    }

    /// Confirms that every If, Switch and Atomic scope has been closed.
    pub fn validate_complete(&self) -> Result<(), SemanticError> {
        if self.open.len() > 1 {
            let kind = self.block(self.current()).kind;
            return Err(SemanticError::new(
                Kind::OpenScope,
                self.calls,
                format!(
                    "processor `{}` still has {} open scope(s), innermost is {:?}",
                    self.name,
                    self.open.len() - 1,
                    kind
                ),
            ));
        }
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.open.len() == 1
    }

    // ---- id-level builder calls ----------------------------------------

    pub fn push_command(&mut self, block: BlockId, cmd: Command) -> Result<BlockId, SemanticError> {
        let site = self.next_call();
        self.expect_current(block, site, &[BlockKind::Body, BlockKind::Then, BlockKind::Else, BlockKind::Case, BlockKind::Atomic])?;
        self.check_command(&cmd, site)?;
        self.blocks[block.index()].nodes.push(Node {
            ordinal: site,
            stmt: Stmt::Command(cmd),
        });
        Ok(block)
    }

    pub fn open_if(&mut self, block: BlockId, cond: VarRef) -> Result<BlockId, SemanticError> {
        let site = self.next_call();
        self.expect_current(block, site, &[BlockKind::Body, BlockKind::Then, BlockKind::Else, BlockKind::Case, BlockKind::Atomic])?;
        let info = self.resolve(&cond, site)?;
        if !info.boolean {
            return Err(SemanticError::new(
                Kind::NotBoolean,
                site,
                format!("condition `{cond}` is not a boolean local"),
            ));
        }
        let then_block = self.alloc(BlockKind::Then, block);
        self.blocks[block.index()].nodes.push(Node {
            ordinal: site,
            stmt: Stmt::If {
                cond,
                then_block,
                else_block: None,
            },
        });
        self.open.push(then_block);
        Ok(then_block)
    }

    pub fn open_else(&mut self, then_block: BlockId) -> Result<BlockId, SemanticError> {
        let site = self.next_call();
        self.expect_current(then_block, site, &[BlockKind::Then])?;
        let parent = self.block(then_block).parent.expect("then block has a parent");
        let else_block = self.alloc(BlockKind::Else, parent);
        match self.owner_of(parent, then_block) {
            Some(Stmt::If { else_block: slot, .. }) => *slot = Some(else_block),
            _ => unreachable!("then block without an If node"),
        }
        self.open.pop();
        self.open.push(else_block);
        Ok(else_block)
    }

    pub fn end_if(&mut self, block: BlockId) -> Result<BlockId, SemanticError> {
        let site = self.next_call();
        self.expect_current(block, site, &[BlockKind::Then, BlockKind::Else])?;
        self.open.pop();
        Ok(self.block(block).parent.expect("if branch has a parent"))
    }

    pub fn open_switch(
        &mut self,
        block: BlockId,
        selector: Operand,
    ) -> Result<BlockId, SemanticError> {
        let site = self.next_call();
        self.expect_current(block, site, &[BlockKind::Body, BlockKind::Then, BlockKind::Else, BlockKind::Case, BlockKind::Atomic])?;
        self.operand_width(&selector, site)?;
        let container = self.alloc(BlockKind::Switch, block);
        self.blocks[block.index()].nodes.push(Node {
            ordinal: site,
            stmt: Stmt::Switch {
                selector,
                container,
                cases: Vec::new(),
            },
        });
        self.open.push(container);
        Ok(container)
    }

    /// Opens a case of the innermost switch, closing the previous case.
    /// `scope` is the switch container or its currently open case.
    pub fn open_case(&mut self, scope: BlockId, value: UValue) -> Result<BlockId, SemanticError> {
        let site = self.next_call();
        self.expect_current(scope, site, &[BlockKind::Switch, BlockKind::Case])?;
        let container = self.switch_container(scope);
        let parent = self.block(container).parent.expect("switch has a parent");
        let Some(Stmt::Switch { selector, cases, .. }) = self.owner_of_ref(parent, container) else {
            unreachable!("switch container without a Switch node");
        };
        let width = self.operand_width(selector, site)?;
        if value.width() != width {
            return Err(SemanticError::new(
                Kind::WidthMismatch,
                site,
                format!("case {value} does not match selector width {width}"),
            ));
        }
        if cases.iter().any(|(v, _)| *v == value) {
            return Err(SemanticError::new(
                Kind::DuplicateName,
                site,
                format!("case {value} appears twice"),
            ));
        }
        let case = self.alloc(BlockKind::Case, container);
        if let Some(Stmt::Switch { cases, .. }) = self.owner_of(parent, container) {
            cases.push((value, case));
        }
        if scope != container {
            self.open.pop();
        }
        self.open.push(case);
        Ok(case)
    }

    pub fn end_switch(&mut self, scope: BlockId) -> Result<BlockId, SemanticError> {
        let site = self.next_call();
        self.expect_current(scope, site, &[BlockKind::Switch, BlockKind::Case])?;
        let container = self.switch_container(scope);
        if scope != container {
            self.open.pop();
        }
        self.open.pop();
        Ok(self.block(container).parent.expect("switch has a parent"))
    }

    pub fn open_atomic(&mut self, block: BlockId) -> Result<BlockId, SemanticError> {
        let site = self.next_call();
        self.expect_current(block, site, &[BlockKind::Body, BlockKind::Then, BlockKind::Else, BlockKind::Case, BlockKind::Atomic])?;
        if self.open.iter().any(|b| self.block(*b).kind == BlockKind::Atomic) {
            return Err(SemanticError::new(
                Kind::AtomicNesting,
                site,
                "atomic blocks cannot be nested",
            ));
        }
        let atomic = self.alloc(BlockKind::Atomic, block);
        self.blocks[block.index()].nodes.push(Node {
            ordinal: site,
            stmt: Stmt::Atomic { block: atomic },
        });
        self.open.push(atomic);
        Ok(atomic)
    }

    pub fn end_atomic(&mut self, block: BlockId) -> Result<BlockId, SemanticError> {
        let site = self.next_call();
        self.expect_current(block, site, &[BlockKind::Atomic])?;
        self.open.pop();
        Ok(self.block(block).parent.expect("atomic block has a parent"))
    }

    // ---- internals ------------------------------------------------------

    fn next_call(&mut self) -> u32 {
        self.calls += 1;
        self.calls
    }

    fn alloc(&mut self, kind: BlockKind, parent: BlockId) -> BlockId {
        let id = BlockId(self.blocks.len() as u32);
        self.blocks.push(BlockNode {
            kind,
            parent: Some(parent),
            nodes: Vec::new(),
        });
        id
    }

    fn switch_container(&self, scope: BlockId) -> BlockId {
        match self.block(scope).kind {
            BlockKind::Case => self.block(scope).parent.expect("case has a container"),
            _ => scope,
        }
    }

    fn owner_of(&mut self, parent: BlockId, child: BlockId) -> Option<&mut Stmt> {
        self.blocks[parent.index()]
            .nodes
            .iter_mut()
            .rev()
            .map(|n| &mut n.stmt)
            .find(|s| owns(s, child))
    }

    fn owner_of_ref(&self, parent: BlockId, child: BlockId) -> Option<&Stmt> {
        self.blocks[parent.index()]
            .nodes
            .iter()
            .rev()
            .map(|n| &n.stmt)
            .find(|s| owns(s, child))
    }

    fn expect_current(
        &self,
        block: BlockId,
        site: u32,
        allowed: &[BlockKind],
    ) -> Result<(), SemanticError> {
        let Some(node) = self.blocks.get(block.index()) else {
            return Err(SemanticError::new(
                Kind::OpenScope,
                site,
                format!("block {} does not exist", block.0),
            ));
        };
        if block != self.current() {
            return Err(SemanticError::new(
                Kind::OpenScope,
                site,
                format!(
                    "{:?} block {} is not the innermost open scope ({:?} block {} is)",
                    node.kind,
                    block.0,
                    self.block(self.current()).kind,
                    self.current().0
                ),
            ));
        }
        if !allowed.contains(&node.kind) {
            return Err(SemanticError::new(
                Kind::OpenScope,
                site,
                format!("operation not valid in a {:?} scope", node.kind),
            ));
        }
        Ok(())
    }

    fn resolve(&self, var: &VarRef, site: u32) -> Result<VarInfo, SemanticError> {
        if var.scope == Scope::Output && self.output.is_none() {
            return Err(SemanticError::new(
                Kind::OutputUndeclared,
                site,
                format!("`{var}` refers to an output, but processor `{}` has none", self.name),
            ));
        }
        self.lookup(var).ok_or_else(|| {
            SemanticError::new(
                Kind::UndeclaredName,
                site,
                format!("`{var}` is not declared in processor `{}`", self.name),
            )
        })
    }

    fn operand_width(&self, op: &Operand, site: u32) -> Result<UWidth, SemanticError> {
        match op {
            Operand::Var(v) => self.resolve(v, site).map(|i| i.width),
            Operand::Const(c) => Ok(c.width()),
        }
    }

    fn operand_is_boolean(&self, op: &Operand) -> bool {
        match op {
            Operand::Var(v) => self.lookup(v).is_some_and(|i| i.boolean),
            Operand::Const(c) => c.magnitude() <= 1 && c.width() == UWidth::U8,
        }
    }

    fn writable(&self, target: &VarRef, site: u32) -> Result<VarInfo, SemanticError> {
        let info = self.resolve(target, site)?;
        if target.scope == Scope::Input {
            return Err(SemanticError::new(
                Kind::WriteToInput,
                site,
                format!("`{target}` is an input field and cannot be written"),
            ));
        }
        Ok(info)
    }

    fn check_command(&self, cmd: &Command, site: u32) -> Result<(), SemanticError> {
        let mismatch = |what: &str, expected: UWidth, found: UWidth| {
            SemanticError::new(
                Kind::WidthMismatch,
                site,
                format!("{what}: expected {expected}, found {found}"),
            )
        };
        let not_bool = |msg: String| SemanticError::new(Kind::NotBoolean, site, msg);

        // Resolve every read first so undeclared names win over other errors.
        let mut widths = Vec::new();
        for op in cmd.operands() {
            widths.push(self.operand_width(op, site)?);
        }
        let ring = match cmd {
            Command::RingPush { ring, .. } | Command::RingReadHead { ring, .. } => {
                Some(self.ring(ring).ok_or_else(|| {
                    SemanticError::new(
                        Kind::UndeclaredName,
                        site,
                        format!("ring buffer `{ring}` is not declared in processor `{}`", self.name),
                    )
                })?)
            }
            _ => None,
        };
        let target = match cmd.target() {
            Some(t) => Some((t, self.writable(t, site)?)),
            None => None,
        };

        match cmd {
            Command::AssignConst { value, .. } => {
                let (t, info) = target.expect("has target");
                if info.boolean && value.magnitude() > 1 {
                    return Err(not_bool(format!("boolean `{t}` can only hold 0 or 1, got {value}")));
                }
                if value.width() != info.width {
                    return Err(mismatch(&format!("constant assigned to `{t}`"), info.width, value.width()));
                }
            }
            Command::AssignVar { source, .. } => {
                let (t, info) = target.expect("has target");
                if info.boolean && !self.operand_is_boolean(source) {
                    return Err(not_bool(format!("`{source}` is not boolean and cannot be stored in `{t}`")));
                }
                if widths[0] != info.width {
                    return Err(mismatch(&format!("assignment to `{t}`"), info.width, widths[0]));
                }
            }
            Command::Cast { .. } | Command::Rand { .. } | Command::RingReadHead { .. } => {
                let (t, info) = target.expect("has target");
                if info.boolean {
                    return Err(not_bool(format!(
                        "{} cannot write the boolean `{t}`",
                        cmd.kind_name()
                    )));
                }
                if let Some(r) = ring {
                    if r.element_width() != info.width {
                        return Err(mismatch(
                            &format!("read from ring `{}` into `{t}`", r.name()),
                            r.element_width(),
                            info.width,
                        ));
                    }
                }
            }
            Command::Add { .. } | Command::Sub { .. } => {
                let (t, info) = target.expect("has target");
                if info.boolean {
                    return Err(not_bool(format!("arithmetic result cannot be stored in boolean `{t}`")));
                }
                for w in &widths {
                    if *w != info.width {
                        return Err(mismatch(&format!("{} into `{t}`", cmd.kind_name()), info.width, *w));
                    }
                }
            }
            Command::Equals { .. } | Command::Greater { .. } => {
                let (t, info) = target.expect("has target");
                if !info.boolean {
                    return Err(not_bool(format!(
                        "{} needs a boolean local as target, `{t}` is not",
                        cmd.kind_name()
                    )));
                }
                if widths[0] != widths[1] {
                    return Err(mismatch(&format!("{} operands", cmd.kind_name()), widths[0], widths[1]));
                }
            }
            Command::RingPush { .. } => {
                let r = ring.expect("ring resolved");
                if widths[0] != r.element_width() {
                    return Err(mismatch(
                        &format!("push into ring `{}`", r.name()),
                        r.element_width(),
                        widths[0],
                    ));
                }
            }
            Command::SendBack | Command::Forward { .. } => {}
        }
        Ok(())
    }
}

fn owns(stmt: &Stmt, child: BlockId) -> bool {
    match stmt {
        Stmt::If {
            then_block,
            else_block,
            ..
        } => *then_block == child || *else_block == Some(child),
        Stmt::Switch { container, .. } => *container == child,
        Stmt::Atomic { block } => *block == child,
        Stmt::Command(_) => false,
    }
}

fn reserved(site: u32, e: ModelError) -> SemanticError {
    SemanticError::new(Kind::ReservedName, site, e.to_string())
}
