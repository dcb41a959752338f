//! Aggregation that grows the packet: the output carries the sum of the two
//! input fields in front of them. Shows the header fixups and optionally
//! writes the generated P4 to the directory given as the first argument.
use parrot::codegen::generate;
use parrot::programs;
use parrot::sim::{SimPacket, SimState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solution = programs::insert_agg()?;
    let mut state = SimState::new(&solution, 0);

    let mut payload = 1000u32.to_be_bytes().to_vec();
    payload.extend_from_slice(&234u32.to_be_bytes());
    let before = SimPacket::udp(2, 1234, programs::AGG_PORT, payload);
    let r = state.step(&solution, &before)?;

    let (a, b) = (before.ipv4.unwrap(), r.packet.ipv4.unwrap());
    println!("verdict      {:?}", r.verdict);
    println!("payload      {} -> {}", hex::encode(&before.payload), hex::encode(&r.packet.payload));
    println!("ipv4.totalLen {} -> {}", a.total_len, b.total_len);
    println!("ipv4.hdrChecksum {:#06x} -> {:#06x}", a.hdr_checksum, b.hdr_checksum);
    println!(
        "udp.len      {} -> {}",
        before.udp_header().unwrap().len,
        r.packet.udp_header().unwrap().len
    );
    println!("udp.checksum {:#06x} -> {:#06x}", before.udp_header().unwrap().checksum, r.packet.udp_header().unwrap().checksum);

    if let Some(dir) = std::env::args().nth(1) {
        for path in generate(&solution)?.write_atomic(dir.as_ref())? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
