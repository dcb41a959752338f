//! The same comparison emitted as an if/else and as a match-action table.
//! The simulator cannot tell them apart; the P4 differs.
use parrot::codegen::generate;
use parrot::flow::Hint;
use parrot::programs;
use parrot::sim::{run_trace, SimPacket};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plain = programs::guess_game(Hint::IfElse)?;
    let table = programs::guess_game(Hint::Table)?;

    let packets: Vec<SimPacket> = (0..=255u8)
        .map(|g| SimPacket::udp(1, 40000, programs::GUESS_PORT, vec![g]))
        .collect();
    let same = run_trace(&plain, &packets, 3) == run_trace(&table, &packets, 3);
    println!("simulated results identical over 256 guesses: {same}");

    let (a, b) = (generate(&plain)?, generate(&table)?);
    println!("headers identical: {}", a.headers == b.headers);
    println!("parser identical:  {}", a.parser == b.parser);
    println!("\n---- decls.p4inc with TABLE");
    print!("{}", b.decls);
    println!("\n---- apply lines that differ");
    for line in b.apply.lines().filter(|l| !a.apply.contains(l)) {
        println!("+ {line}");
    }
    for line in a.apply.lines().filter(|l| !b.apply.contains(l)) {
        println!("- {line}");
    }
    Ok(())
}
