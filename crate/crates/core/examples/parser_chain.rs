//! Two selectors on the same stack form one parser chain; a third on TCP
//! peeks at the payload with lookahead. Prints the parser fragment and
//! classifies a few packets.
use std::sync::Arc;

use parrot::codegen::generate;
use parrot::flow::FlowProcessor;
use parrot::model::{HeaderLayout, UValue, UWidth};
use parrot::selector::{Criterion, FlowSelector, ProtocolStack};
use parrot::sim::{classify, SimPacket};
use parrot::solution::Solution;

fn echo(name: &str) -> Result<Arc<FlowProcessor>, Box<dyn std::error::Error>> {
    let input = HeaderLayout::of(format!("{name}_req"), &[("x", UWidth::U8)])?;
    Ok(Arc::new(FlowProcessor::builder(name, input).build()?))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dns = FlowSelector::new(
        "dns_sel",
        ProtocolStack::Ipv4Udp,
        vec![Criterion::new("udp.dstPort", UValue::u16(53))],
        None,
        echo("dns")?,
    )?;
    let local_dns = FlowSelector::new(
        "local_sel",
        ProtocolStack::Ipv4Udp,
        vec![
            Criterion::new("udp.dstPort", UValue::u16(53)),
            Criterion::new("ipv4.srcAddr", UValue::u32(0x0A00_0001)),
        ],
        None,
        echo("local")?,
    )?;
    let magic = FlowSelector::new(
        "magic_sel",
        ProtocolStack::Ipv4Tcp,
        vec![Criterion::new("tcp.dstPort", UValue::u16(9000)), Criterion::new("magic", UValue::u8(0xA5))],
        Some(HeaderLayout::of("magic_hdr", &[("magic", UWidth::U8)])?),
        echo("magic")?,
    )?;
    let solution = Solution::with_defaults(vec![dns, local_dns, magic])?;

    print!("{}", generate(&solution)?.parser);

    let samples = [
        ("udp :53 from 10.0.0.1", SimPacket::udp(0, 1, 53, vec![0])),
        ("tcp :9000 magic", SimPacket::tcp(0, 1, 9000, vec![0xA5])),
        ("tcp :9000 no magic", SimPacket::tcp(0, 1, 9000, vec![0x00])),
        ("udp :54", SimPacket::udp(0, 1, 54, vec![0])),
    ];
    println!();
    for (what, p) in samples {
        let hit = classify(&solution, &p)?.map(|s| s.name().to_string());
        // The earlier selector wins even though `local_sel` also matches.
        println!("{what:<24} -> {}", hit.as_deref().unwrap_or("passthrough"));
    }
    Ok(())
}
