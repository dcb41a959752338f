//! Describe application-layer packet computations once, then simulate them
//! bit-exactly or emit P4-16 fragments for a V1Model template.
//!
//! A program is a [`solution::Solution`]: [`selector::FlowSelector`]s bind
//! packets (by standard header fields and optional payload lookahead) to
//! [`flow::FlowProcessor`]s, whose command trees are built through scoped
//! handles and checked call by call.
//!
//! ```
//! use parrot::flow::Hint;
//! use parrot::sim::{SimPacket, SimState};
//! use parrot::{codegen, programs};
//!
//! let solution = programs::guess_game(Hint::IfElse)?;
//! let mut state = SimState::new(&solution, 7);
//! let r = state.step(&solution, &SimPacket::udp(1, 40000, programs::GUESS_PORT, vec![10]))?;
//! assert_eq!(r.packet.payload, b"GT");
//!
//! let files = codegen::generate(&solution)?;
//! assert!(files.parser.contains("#define PARROT_CHAIN_IPV4_UDP"));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! Modules:
//! - [`model`]: fixed-width values, header layouts, the internet checksum.
//! - [`flow`]: commands, the builder and its semantic checks.
//! - [`selector`]: packet classification and parser chains.
//! - [`codegen`]: P4 fragments, the template and atomic output.
//! - [`sim`]: the packet interpreter.
//! - [`program`], [`trace_file`], [`cli`]: JSON documents and the command line.
//! - [`programs`]: the built-in example programs.

pub mod cli;
pub mod codegen;
pub mod flow;
pub mod model;
pub mod program;
pub mod programs;
pub mod selector;
pub mod sim;
pub mod solution;
pub mod trace_file;

use thiserror::Error;

/// Any failure surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Semantic(#[from] flow::SemanticError),
    #[error(transparent)]
    Selector(#[from] selector::SelectorError),
    #[error(transparent)]
    Codegen(#[from] codegen::CodegenError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
}
