//! Randomized selector pairs that both match one constructed packet.

use std::sync::Arc;

use parrot::flow::FlowProcessor;
use parrot::model::{HeaderLayout, UValue, UWidth};
use parrot::selector::{Criterion, FlowSelector, ProtocolStack, STANDARD_FIELDS};
use parrot::sim::{classify, SimPacket};
use parrot::solution::Solution;
use rand::seq::SliceRandom;
use rand::Rng;

fn selector(
    rng: &mut impl Rng,
    name: &str,
    stack: ProtocolStack,
    packet: &SimPacket,
    corrupt: bool,
) -> FlowSelector {
    let l4 = match stack {
        ProtocolStack::Ipv4Udp => "udp",
        ProtocolStack::Ipv4Tcp => "tcp",
    };
    let pool: Vec<_> = STANDARD_FIELDS
        .iter()
        .filter(|f| matches!(f.header, "eth" | "ipv4") || f.header == l4)
        .collect();
    let n = rng.gen_range(1..=3);
    let mut criteria: Vec<Criterion> = pool
        .choose_multiple(rng, n)
        .map(|f| {
            let v = packet.field(f).expect("field present for the stack");
            Criterion::new(f.qualified(), UValue::new(f.width, v).unwrap())
        })
        .collect();
    let lookahead = if rng.gen_bool(0.3) {
        criteria.push(Criterion::new("tag", UValue::u8(packet.payload[0])));
        Some(HeaderLayout::of(format!("{name}_la"), &[("tag", UWidth::U8)]).unwrap())
    } else {
        None
    };
    if corrupt {
        let c = criteria.choose_mut(rng).unwrap();
        let w = c.value.width();
        // Stay within the wire width of 48-bit MACs.
        c.value = UValue::new(w, (c.value.magnitude() ^ 1) & w.max()).unwrap();
    }
    let p = FlowProcessor::builder(
        format!("{name}_p"),
        HeaderLayout::of(format!("{name}_in"), &[("x", UWidth::U8)]).unwrap(),
    )
    .build()
    .unwrap();
    FlowSelector::new(name, stack, criteria, lookahead, Arc::new(p)).unwrap()
}

/// Builds two selectors matching one packet, optionally behind a decoy that
/// misses, and checks that classification picks whichever is registered
/// first, in both orders.
pub fn overlap_case(rng: &mut impl Rng) -> Result<(), String> {
    let stack = *[ProtocolStack::Ipv4Udp, ProtocolStack::Ipv4Tcp].choose(rng).unwrap();
    let payload = super::random_payload(rng, 1, 16);
    let packet = match stack {
        ProtocolStack::Ipv4Udp => SimPacket::udp(rng.gen_range(0..64), rng.gen(), rng.gen(), payload),
        ProtocolStack::Ipv4Tcp => SimPacket::tcp(rng.gen_range(0..64), rng.gen(), rng.gen(), payload),
    };
    let a = selector(rng, "first", stack, &packet, false);
    let b = selector(rng, "second", stack, &packet, false);
    let decoy = rng.gen_bool(0.5).then(|| selector(rng, "decoy", stack, &packet, true));
    for (x, y) in [(&a, &b), (&b, &a)] {
        let mut sels: Vec<FlowSelector> = decoy.iter().cloned().collect();
        sels.push(x.clone());
        sels.push(y.clone());
        let sol = Solution::with_defaults(sels).map_err(|e| e.to_string())?;
        let got = classify(&sol, &packet).map_err(|e| e.to_string())?;
        match got {
            Some(s) if s.name() == x.name() => {}
            Some(s) => return Err(format!("expected `{}`, classified as `{}`", x.name(), s.name())),
            None => return Err(format!("expected `{}`, nothing matched", x.name())),
        }
    }
    Ok(())
}
