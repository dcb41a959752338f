use std::fmt;

use serde::Serialize;

use crate::model::UValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Scope {
    Input,
    Output,
    Local,
    Shared,
}

impl Scope {
    /// Prefix used in textual references such as `in.guess`.
    pub fn prefix(self) -> &'static str {
        match self {
            Scope::Input => "in",
            Scope::Output => "out",
            Scope::Local => "local",
            Scope::Shared => "shared",
        }
    }

    pub fn from_prefix(s: &str) -> Option<Scope> {
        match s {
            "in" => Some(Scope::Input),
            "out" => Some(Scope::Output),
            "local" => Some(Scope::Local),
            "shared" => Some(Scope::Shared),
            _ => None,
        }
    }
}

/// A name in one of a processor's scopes. Widths are resolved against the
/// owning processor when the reference is added to a block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VarRef {
    pub scope: Scope,
    pub name: String,
}

impl VarRef {
    pub fn new(scope: Scope, name: impl Into<String>) -> Self {
        VarRef {
            scope,
            name: name.into(),
        }
    }

    pub fn input(name: impl Into<String>) -> Self {
        VarRef::new(Scope::Input, name)
    }

    pub fn output(name: impl Into<String>) -> Self {
        VarRef::new(Scope::Output, name)
    }

    pub fn local(name: impl Into<String>) -> Self {
        VarRef::new(Scope::Local, name)
    }

    pub fn shared(name: impl Into<String>) -> Self {
        VarRef::new(Scope::Shared, name)
    }

    /// Parses `scope.name`, e.g. `out.c1`.
    pub fn parse(s: &str) -> Option<VarRef> {
        let (scope, name) = s.split_once('.')?;
        Some(VarRef::new(Scope::from_prefix(scope)?, name))
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.scope.prefix(), self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Operand {
    Var(VarRef),
    Const(UValue),
}

impl From<VarRef> for Operand {
    fn from(v: VarRef) -> Self {
        Operand::Var(v)
    }
}

impl From<UValue> for Operand {
    fn from(v: UValue) -> Self {
        Operand::Const(v)
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => v.fmt(f),
            Operand::Const(c) => c.fmt(f),
        }
    }
}

/// Implementation strategy for an equality test. Never changes semantics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum Hint {
    #[default]
    IfElse,
    Table,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Command {
    AssignConst {
        target: VarRef,
        value: UValue,
    },
    AssignVar {
        target: VarRef,
        source: Operand,
    },
    Cast {
        target: VarRef,
        source: Operand,
    },
    Add {
        target: VarRef,
        lhs: Operand,
        rhs: Operand,
    },
    Sub {
        target: VarRef,
        lhs: Operand,
        rhs: Operand,
    },
    /// Writes 1 to the boolean `target` when `lhs == rhs`, else 0.
    Equals {
        target: VarRef,
        lhs: Operand,
        rhs: Operand,
        hint: Hint,
    },
    /// Writes 1 to the boolean `target` when `lhs > rhs`, else 0.
    Greater {
        target: VarRef,
        lhs: Operand,
        rhs: Operand,
    },
    /// Uniform value over the target's full width.
    Rand {
        target: VarRef,
    },
    /// Writes at the head slot and advances the head modulo capacity.
    RingPush {
        ring: String,
        source: Operand,
    },
    /// Reads the slot at the head index, i.e. the oldest element once the
    /// ring has wrapped.
    RingReadHead {
        ring: String,
        target: VarRef,
    },
    SendBack,
    Forward {
        port: u16,
    },
}

impl Command {
    pub fn assign_const(target: VarRef, value: UValue) -> Self {
        Command::AssignConst { target, value }
    }

    pub fn assign(target: VarRef, source: impl Into<Operand>) -> Self {
        Command::AssignVar {
            target,
            source: source.into(),
        }
    }

    pub fn cast(target: VarRef, source: impl Into<Operand>) -> Self {
        Command::Cast {
            target,
            source: source.into(),
        }
    }

    pub fn add(target: VarRef, lhs: impl Into<Operand>, rhs: impl Into<Operand>) -> Self {
        Command::Add {
            target,
            lhs: lhs.into(),
            rhs: rhs.into(),
        }
    }

    pub fn sub(target: VarRef, lhs: impl Into<Operand>, rhs: impl Into<Operand>) -> Self {
        Command::Sub {
            target,
            lhs: lhs.into(),
            rhs: rhs.into(),
        }
    }

    pub fn equals(target: VarRef, lhs: impl Into<Operand>, rhs: impl Into<Operand>) -> Self {
        Command::equals_hinted(target, lhs, rhs, Hint::default())
    }

    pub fn equals_hinted(
        target: VarRef,
        lhs: impl Into<Operand>,
        rhs: impl Into<Operand>,
        hint: Hint,
    ) -> Self {
        Command::Equals {
            target,
            lhs: lhs.into(),
            rhs: rhs.into(),
            hint,
        }
    }

    pub fn greater(target: VarRef, lhs: impl Into<Operand>, rhs: impl Into<Operand>) -> Self {
        Command::Greater {
            target,
            lhs: lhs.into(),
            rhs: rhs.into(),
        }
    }

    pub fn rand(target: VarRef) -> Self {
        Command::Rand { target }
    }

    pub fn ring_push(ring: impl Into<String>, source: impl Into<Operand>) -> Self {
        Command::RingPush {
            ring: ring.into(),
            source: source.into(),
        }
    }

    pub fn ring_read_head(ring: impl Into<String>, target: VarRef) -> Self {
        Command::RingReadHead {
            ring: ring.into(),
            target,
        }
    }

    pub fn send_back() -> Self {
        Command::SendBack
    }

    pub fn forward(port: u16) -> Self {
        Command::Forward { port }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Command::AssignConst { .. } => "AssignConst",
            Command::AssignVar { .. } => "AssignVar",
            Command::Cast { .. } => "Cast",
            Command::Add { .. } => "Add",
            Command::Sub { .. } => "Sub",
            Command::Equals { .. } => "Equals",
            Command::Greater { .. } => "Greater",
            Command::Rand { .. } => "Rand",
            Command::RingPush { .. } => "RingPush",
            Command::RingReadHead { .. } => "RingReadHead",
            Command::SendBack => "SendBack",
            Command::Forward { .. } => "Forward",
        }
    }

    pub fn target(&self) -> Option<&VarRef> {
        match self {
            Command::AssignConst { target, .. }
            | Command::AssignVar { target, .. }
            | Command::Cast { target, .. }
            | Command::Add { target, .. }
            | Command::Sub { target, .. }
            | Command::Equals { target, .. }
            | Command::Greater { target, .. }
            | Command::Rand { target }
            | Command::RingReadHead { target, .. } => Some(target),
            Command::RingPush { .. } | Command::SendBack | Command::Forward { .. } => None,
        }
    }

    /// Operands read by the command, in evaluation order.
    pub fn operands(&self) -> Vec<&Operand> {
        match self {
            Command::AssignVar { source, .. }
            | Command::Cast { source, .. }
            | Command::RingPush { source, .. } => vec![source],
            Command::Add { lhs, rhs, .. }
            | Command::Sub { lhs, rhs, .. }
            | Command::Equals { lhs, rhs, .. }
            | Command::Greater { lhs, rhs, .. } => vec![lhs, rhs],
            _ => Vec::new(),
        }
    }
}
