//! The number-guessing game, written as a user script: build the processor,
//! bind it to UDP port 5555, then play a binary search against the
//! simulator and show the generated apply block.
use std::sync::Arc;

use parrot::codegen::generate;
use parrot::flow::{BlockOps, Command, FlowProcessor, Hint, VarRef};
use parrot::model::{FieldDecl, HeaderLayout, SharedVariableDecl, UValue, UWidth};
use parrot::selector::{Criterion, FlowSelector, ProtocolStack};
use parrot::sim::{SimPacket, SimState};
use parrot::solution::Solution;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let input = HeaderLayout::of("guess_req", &[("guess", UWidth::U8)])?;
    let output = HeaderLayout::of("guess_resp", &[("c1", UWidth::U8), ("c2", UWidth::U8)])?;
    let mut p = FlowProcessor::builder("guess_game", input)
        .output(output)
        .local(FieldDecl::boolean("lt")?)
        .local(FieldDecl::boolean("gt")?)
        .local(FieldDecl::boolean("won")?)
        .shared(SharedVariableDecl::new("secret", UValue::u8(42))?)
        .build()?;

    let (o, k, l, g, t) = (b'O', b'K', b'L', b'G', b'T');
    p.body()
        .add(Command::assign_const(VarRef::output("c1"), UValue::u8(o)))?
        .add(Command::assign_const(VarRef::output("c2"), UValue::u8(k)))?
        .atomic()?
            .add(Command::greater(VarRef::local("gt"), VarRef::shared("secret"), VarRef::input("guess")))?
            .add(Command::greater(VarRef::local("lt"), VarRef::input("guess"), VarRef::shared("secret")))?
            .if_(VarRef::local("lt"))?
                .add(Command::assign_const(VarRef::output("c1"), UValue::u8(l)))?
                .add(Command::assign_const(VarRef::output("c2"), UValue::u8(t)))?
            .end_if()?
            .if_(VarRef::local("gt"))?
                .add(Command::assign_const(VarRef::output("c1"), UValue::u8(g)))?
                .add(Command::assign_const(VarRef::output("c2"), UValue::u8(t)))?
            .end_if()?
            .add(Command::equals_hinted(
                VarRef::local("won"),
                VarRef::input("guess"),
                VarRef::shared("secret"),
                Hint::IfElse,
            ))?
            .if_(VarRef::local("won"))?
                .add(Command::rand(VarRef::shared("secret")))?
            .end_if()?
        .end_atomic()?
        .add(Command::send_back())?;

    let selector = FlowSelector::new(
        "guess_sel",
        ProtocolStack::Ipv4Udp,
        vec![Criterion::new("udp.dstPort", UValue::u16(5555))],
        None,
        Arc::new(p),
    )?;
    let solution = Solution::with_defaults(vec![selector])?;

    let mut state = SimState::new(&solution, 1);
    let (mut lo, mut hi) = (0u16, 255u16);
    loop {
        let guess = ((lo + hi) / 2) as u8;
        let r = state.step(&solution, &SimPacket::udp(1, 40000, 5555, vec![guess]))?;
        let reply = String::from_utf8_lossy(&r.packet.payload).into_owned();
        println!("guess {guess:>3} -> {reply} (egress port {})", r.egress_port);
        match reply.as_str() {
            "GT" => lo = guess as u16 + 1,
            "LT" => hi = guess as u16 - 1,
            _ => break,
        }
    }
    println!("new secret: {}", state.shared("guess_game", "secret").unwrap());

    println!("\n---- apply.p4inc");
    print!("{}", generate(&solution)?.apply);
    Ok(())
}
