//! A ring buffer of the last four samples. Each packet reads the oldest
//! slot, pushes its own value and bumps a shared counter, all inside one
//! atomic block.
use parrot::codegen::generate;
use parrot::programs;
use parrot::sim::{SimPacket, SimState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solution = programs::ring_log()?;
    let mut state = SimState::new(&solution, 0);
    for v in [10u32, 20, 30, 40, 50, 60] {
        let r = state.step(&solution, &SimPacket::udp(0, 1, programs::RING_PORT, v.to_be_bytes().to_vec()))?;
        let oldest = u32::from_be_bytes(r.packet.payload[..4].try_into()?);
        let count = u16::from_be_bytes(r.packet.payload[4..6].try_into()?);
        println!("push {v:>2}: oldest {oldest:>2}, count {count}, out port {}", r.egress_port);
    }
    let ring = state.ring("ring_log", "history").unwrap();
    let slots: Vec<String> = ring.slots.iter().map(|s| s.magnitude().to_string()).collect();
    println!("slots [{}], head {}", slots.join(", "), ring.head);

    println!("\n---- apply.p4inc");
    print!("{}", generate(&solution)?.apply);
    Ok(())
}
