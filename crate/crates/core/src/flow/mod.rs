//! Builder API for flow processors: typed command blocks with structured
//! control flow, checked as each node is added.

mod builder;
mod command;
mod error;
mod processor;

pub use builder::{AtomicBlock, Block, BlockOps, CaseBlock, ElseBlock, Handle, SwitchBlock, ThenBlock};
pub use command::{Command, Hint, Operand, Scope, VarRef};
pub use error::{SemanticError, SemanticErrorKind};
pub use processor::{
    BlockId, BlockKind, BlockNode, FlowProcessor, FlowProcessorBuilder, Node, Stmt, VarInfo,
};
