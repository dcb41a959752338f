//! Built-in programs, written against the builder API.
//!
//! `guess_game` and `insert_agg` also ship as JSON documents; loading those
//! documents yields the same processors as the functions here.

use std::sync::Arc;

use crate::flow::{BlockOps, Command, FlowProcessor, Hint, VarRef};
use crate::model::{FieldDecl, HeaderLayout, RingBufferDecl, SharedVariableDecl, UValue, UWidth};
use crate::selector::{Criterion, FlowSelector, ProtocolStack};
use crate::solution::Solution;
use crate::Error;

pub const GUESS_GAME_JSON: &str = include_str!("../assets/programs/guess_game.json");
pub const INSERT_AGG_JSON: &str = include_str!("../assets/programs/insert_agg.json");

/// Shipped JSON documents by name.
pub const EXAMPLES: &[(&str, &str)] = &[
    ("guess_game", GUESS_GAME_JSON),
    ("insert_agg", INSERT_AGG_JSON),
];

pub fn example_json(name: &str) -> Option<&'static str> {
    EXAMPLES.iter().find(|(n, _)| *n == name).map(|(_, j)| *j)
}

pub const GUESS_PORT: u16 = 5555;
pub const AGG_PORT: u16 = 6000;
pub const RING_PORT: u16 = 7000;
pub const DISPATCH_PORT: u16 = 8000;

/// Response bytes of the guessing game.
pub const RESP_OK: [u8; 2] = *b"OK";
/// The secret is lower than the guess.
pub const RESP_LT: [u8; 2] = *b"LT";
/// The secret is greater than the guess.
pub const RESP_GT: [u8; 2] = *b"GT";

pub const SECRET_INITIAL: u8 = 42;

fn ascii(b: u8) -> UValue {
    UValue::u8(b)
}

/// The number guessing game. The client sends one byte; the reply is two
/// ASCII bytes and goes back out of the ingress port. A correct guess draws
/// a new secret.
pub fn guess_game_processor(hint: Hint) -> Result<FlowProcessor, Error> {
    let input = HeaderLayout::of("guess_req", &[("guess", UWidth::U8)])?;
    let output = HeaderLayout::of("guess_resp", &[("c1", UWidth::U8), ("c2", UWidth::U8)])?;
    let mut p = FlowProcessor::builder("guess_game", input)
        .output(output)
        .local(FieldDecl::boolean("lt")?)
        .local(FieldDecl::boolean("gt")?)
        .local(FieldDecl::boolean("won")?)
        .shared(SharedVariableDecl::new("secret", UValue::u8(SECRET_INITIAL))?)
        .build()?;

    let (c1, c2) = (VarRef::output("c1"), VarRef::output("c2"));
    let guess = VarRef::input("guess");
    let secret = VarRef::shared("secret");
    p.body()
        .add(Command::assign_const(c1.clone(), ascii(RESP_OK[0])))?
        .add(Command::assign_const(c2.clone(), ascii(RESP_OK[1])))?
        .atomic()?
            .add(Command::greater(VarRef::local("gt"), secret.clone(), guess.clone()))?
            .add(Command::greater(VarRef::local("lt"), guess.clone(), secret.clone()))?
            .if_(VarRef::local("lt"))?
                .add(Command::assign_const(c1.clone(), ascii(RESP_LT[0])))?
                .add(Command::assign_const(c2.clone(), ascii(RESP_LT[1])))?
            .end_if()?
            .if_(VarRef::local("gt"))?
                .add(Command::assign_const(c1, ascii(RESP_GT[0])))?
                .add(Command::assign_const(c2, ascii(RESP_GT[1])))?
            .end_if()?
            .add(Command::equals_hinted(VarRef::local("won"), guess, secret.clone(), hint))?
            .if_(VarRef::local("won"))?
                .add(Command::rand(secret))?
            .end_if()?
        .end_atomic()?
        .add(Command::send_back())?;
    p.validate_complete()?;
    Ok(p)
}

pub fn guess_game(hint: Hint) -> Result<Solution, Error> {
    let sel = FlowSelector::new(
        "guess_sel",
        ProtocolStack::Ipv4Udp,
        vec![Criterion::new("udp.dstPort", UValue::u16(GUESS_PORT))],
        None,
        Arc::new(guess_game_processor(hint)?),
    )?;
    Solution::with_defaults(vec![sel])
}

/// Prepends the sum of two u32 values to the UDP payload.
pub fn insert_agg_processor() -> Result<FlowProcessor, Error> {
    let input = HeaderLayout::of("pair", &[("a", UWidth::U32), ("b", UWidth::U32)])?;
    let output = HeaderLayout::of(
        "pair_with_sum",
        &[("total", UWidth::U32), ("first", UWidth::U32), ("second", UWidth::U32)],
    )?;
    let mut p = FlowProcessor::builder("insert_agg", input).output(output).build()?;
    p.body()
        .add(Command::add(VarRef::output("total"), VarRef::input("a"), VarRef::input("b")))?
        .add(Command::assign(VarRef::output("first"), VarRef::input("a")))?
        .add(Command::assign(VarRef::output("second"), VarRef::input("b")))?;
    Ok(p)
}

pub fn insert_agg() -> Result<Solution, Error> {
    let sel = FlowSelector::new(
        "agg_sel",
        ProtocolStack::Ipv4Udp,
        vec![Criterion::new("udp.dstPort", UValue::u16(AGG_PORT))],
        None,
        Arc::new(insert_agg_processor()?),
    )?;
    Solution::with_defaults(vec![sel])
}

/// Keeps the last four u32 samples in a ring and replies with the oldest
/// one, forwarding to port 3.
pub fn ring_log_processor() -> Result<FlowProcessor, Error> {
    let input = HeaderLayout::of("sample", &[("value", UWidth::U32)])?;
    let output = HeaderLayout::of("oldest", &[("value_old", UWidth::U32), ("count", UWidth::U16)])?;
    let mut p = FlowProcessor::builder("ring_log", input)
        .output(output)
        .shared(SharedVariableDecl::new("seen", UValue::u16(0))?)
        .ring(RingBufferDecl::new("history", UWidth::U32, 4)?)
        .build()?;
    p.body()
        .atomic()?
            .add(Command::ring_read_head("history", VarRef::output("value_old")))?
            .add(Command::ring_push("history", VarRef::input("value")))?
            .add(Command::add(VarRef::shared("seen"), VarRef::shared("seen"), UValue::u16(1)))?
            .add(Command::assign(VarRef::output("count"), VarRef::shared("seen")))?
        .end_atomic()?
        .add(Command::forward(3))?;
    Ok(p)
}

pub fn ring_log() -> Result<Solution, Error> {
    let sel = FlowSelector::new(
        "ring_sel",
        ProtocolStack::Ipv4Udp,
        vec![Criterion::new("udp.dstPort", UValue::u16(RING_PORT))],
        None,
        Arc::new(ring_log_processor()?),
    )?;
    Solution::with_defaults(vec![sel])
}

/// TCP messages whose first byte is an opcode: a lookahead selector picks
/// them out, a switch dispatches on the opcode and the rest of the payload
/// is dropped.
pub fn opcode_dispatch_processor(hint: Hint) -> Result<FlowProcessor, Error> {
    // Lookahead peeks at the magic byte without consuming it, so the input
    // layout starts with it too.
    let input = HeaderLayout::of("cmd", &[("magic", UWidth::U8), ("opcode", UWidth::U8), ("arg", UWidth::U16)])?;
    let output = HeaderLayout::of("reply", &[("status", UWidth::U8), ("result", UWidth::U32)])?;
    let mut p = FlowProcessor::builder("dispatch", input)
        .output(output)
        .local(FieldDecl::new("wide", UWidth::U32)?)
        .local(FieldDecl::boolean("is_zero")?)
        .truncate_payload(true)
        .build()?;
    let (status, result) = (VarRef::output("status"), VarRef::output("result"));
    p.body()
        .add(Command::cast(VarRef::local("wide"), VarRef::input("arg")))?
        .switch(VarRef::input("opcode"))?
            .case(UValue::u8(1))?
                .add(Command::add(result.clone(), VarRef::local("wide"), VarRef::local("wide")))?
            .case(UValue::u8(2))?
                .add(Command::sub(result.clone(), UValue::u32(0), VarRef::local("wide")))?
            .case(UValue::u8(3))?
                .add(Command::equals_hinted(VarRef::local("is_zero"), VarRef::input("arg"), UValue::u16(0), hint))?
                .if_(VarRef::local("is_zero"))?
                    .add(Command::assign_const(status.clone(), UValue::u8(2)))?
                .else_()?
                    .add(Command::assign_const(status.clone(), UValue::u8(1)))?
                .end_if()?
        .end_switch()?
        .add(Command::send_back())?;
    Ok(p)
}

pub fn opcode_dispatch(hint: Hint) -> Result<Solution, Error> {
    let magic = HeaderLayout::of("dispatch_magic", &[("magic", UWidth::U8)])?;
    let sel = FlowSelector::new(
        "dispatch_sel",
        ProtocolStack::Ipv4Tcp,
        vec![
            Criterion::new("tcp.dstPort", UValue::u16(DISPATCH_PORT)),
            Criterion::new("magic", UValue::u8(0xA5)),
        ],
        Some(magic),
        Arc::new(opcode_dispatch_processor(hint)?),
    )?;
    Solution::with_defaults(vec![sel])
}

/// No selectors at all: the template degenerates to static forwarding.
pub fn empty() -> Solution {
    Solution::with_defaults(Vec::new()).expect("an empty solution is valid")
}

/// Every builder-defined program, by name, for sweeping tests.
pub fn all() -> Result<Vec<(&'static str, Solution)>, Error> {
    Ok(vec![
        ("guess_game", guess_game(Hint::IfElse)?),
        ("guess_game_table", guess_game(Hint::Table)?),
        ("insert_agg", insert_agg()?),
        ("ring_log", ring_log()?),
        ("opcode_dispatch", opcode_dispatch(Hint::IfElse)?),
        ("opcode_dispatch_table", opcode_dispatch(Hint::Table)?),
        ("empty", empty()),
    ])
}
