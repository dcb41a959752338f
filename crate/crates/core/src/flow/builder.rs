//! Fluent, scope-typed handles over [`FlowProcessor`].
//!
//! Every handle wraps the handle of the scope that opened it, so closing a
//! scope hands back exactly the value that was current before it opened:
//!
//! ```
//! use parrot::flow::{BlockOps, Command, FlowProcessor, VarRef};
//! use parrot::model::{FieldDecl, HeaderLayout, UValue, UWidth};
//!
//! let input = HeaderLayout::of("req", &[("x", UWidth::U8)])?;
//! let output = HeaderLayout::of("resp", &[("y", UWidth::U8)])?;
//! let mut p = FlowProcessor::builder("double", input)
//!     .output(output)
//!     .local(FieldDecl::boolean("big")?)
//!     .build()?;
//!
//! p.body()
//!     .add(Command::greater(VarRef::local("big"), VarRef::input("x"), UValue::u8(127)))?
//!     .if_(VarRef::local("big"))?
//!         .add(Command::assign_const(VarRef::output("y"), UValue::u8(255)))?
//!     .else_()?
//!         .add(Command::add(VarRef::output("y"), VarRef::input("x"), VarRef::input("x")))?
//!     .end_if()?
//!     .add(Command::send_back())?;
//! p.validate_complete()?;
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

use super::command::{Command, Operand, VarRef};
use super::error::SemanticError;
use super::processor::{BlockId, FlowProcessor};
use crate::model::UValue;

/// Access to the processor behind a chain of handles.
pub trait Handle {
    fn processor_mut(&mut self) -> &mut FlowProcessor;
    fn processor(&self) -> &FlowProcessor;
    fn id(&self) -> BlockId;
}

/// Operations shared by every block that holds commands.
pub trait BlockOps: Handle + Sized {
    fn add(mut self, cmd: Command) -> Result<Self, SemanticError> {
        let id = self.id();
        self.processor_mut().push_command(id, cmd)?;
        Ok(self)
    }

    fn if_(mut self, cond: VarRef) -> Result<ThenBlock<Self>, SemanticError> {
        let id = self.id();
        let then = self.processor_mut().open_if(id, cond)?;
        Ok(ThenBlock {
            parent: self,
            id: then,
        })
    }

    fn switch(mut self, selector: impl Into<Operand>) -> Result<SwitchBlock<Self>, SemanticError> {
        let id = self.id();
        let container = self.processor_mut().open_switch(id, selector.into())?;
        Ok(SwitchBlock {
            parent: self,
            id: container,
        })
    }

    fn atomic(mut self) -> Result<AtomicBlock<Self>, SemanticError> {
        let id = self.id();
        let atomic = self.processor_mut().open_atomic(id)?;
        Ok(AtomicBlock {
            parent: self,
            id: atomic,
        })
    }
}

/// The processor body.
pub struct Block<'p> {
    processor: &'p mut FlowProcessor,
    id: BlockId,
}

impl FlowProcessor {
    /// Handle on the body. Fails later, at the first call, if another scope
    /// is still open.
    pub fn body(&mut self) -> Block<'_> {
        Block {
            processor: self,
            id: BlockId::BODY,
        }
    }
}

impl Handle for Block<'_> {
    fn processor_mut(&mut self) -> &mut FlowProcessor {
        self.processor
    }
    fn processor(&self) -> &FlowProcessor {
        self.processor
    }
    fn id(&self) -> BlockId {
        self.id
    }
}

impl BlockOps for Block<'_> {}

macro_rules! nested_handle {
    ($ty:ident) => {
        impl<P: Handle> Handle for $ty<P> {
            fn processor_mut(&mut self) -> &mut FlowProcessor {
                self.parent.processor_mut()
            }
            fn processor(&self) -> &FlowProcessor {
                self.parent.processor()
            }
            fn id(&self) -> BlockId {
                self.id
            }
        }
    };
}

pub struct ThenBlock<P> {
    parent: P,
    id: BlockId,
}

pub struct ElseBlock<P> {
    parent: P,
    id: BlockId,
}

pub struct SwitchBlock<P> {
    parent: P,
    id: BlockId,
}

pub struct CaseBlock<P> {
    parent: P,
    id: BlockId,
}

pub struct AtomicBlock<P> {
    parent: P,
    id: BlockId,
}

nested_handle!(ThenBlock);
nested_handle!(ElseBlock);
nested_handle!(SwitchBlock);
nested_handle!(CaseBlock);
nested_handle!(AtomicBlock);

impl<P: Handle> BlockOps for ThenBlock<P> {}
impl<P: Handle> BlockOps for ElseBlock<P> {}
impl<P: Handle> BlockOps for CaseBlock<P> {}
impl<P: Handle> BlockOps for AtomicBlock<P> {}

impl<P: Handle> ThenBlock<P> {
    pub fn else_(mut self) -> Result<ElseBlock<P>, SemanticError> {
        let id = self.parent.processor_mut().open_else(self.id)?;
        Ok(ElseBlock {
            parent: self.parent,
            id,
        })
    }

    pub fn end_if(mut self) -> Result<P, SemanticError> {
        self.parent.processor_mut().end_if(self.id)?;
        Ok(self.parent)
    }
}

impl<P: Handle> ElseBlock<P> {
    pub fn end_if(mut self) -> Result<P, SemanticError> {
        self.parent.processor_mut().end_if(self.id)?;
        Ok(self.parent)
    }
}

impl<P: Handle> SwitchBlock<P> {
    pub fn case(mut self, value: UValue) -> Result<CaseBlock<P>, SemanticError> {
        let id = self.parent.processor_mut().open_case(self.id, value)?;
        Ok(CaseBlock {
            parent: self.parent,
            id,
        })
    }

    pub fn end_switch(mut self) -> Result<P, SemanticError> {
        self.parent.processor_mut().end_switch(self.id)?;
        Ok(self.parent)
    }
}

impl<P: Handle> CaseBlock<P> {
    /// Closes this case and opens the next one.
    pub fn case(mut self, value: UValue) -> Result<CaseBlock<P>, SemanticError> {
        let id = self.parent.processor_mut().open_case(self.id, value)?;
        Ok(CaseBlock {
            parent: self.parent,
            id,
        })
    }

    pub fn end_switch(mut self) -> Result<P, SemanticError> {
        self.parent.processor_mut().end_switch(self.id)?;
        Ok(self.parent)
    }
}

impl<P: Handle> AtomicBlock<P> {
    pub fn end_atomic(mut self) -> Result<P, SemanticError> {
        self.parent.processor_mut().end_atomic(self.id)?;
        Ok(self.parent)
    }
}
