mod common;

use std::sync::Arc;

use parrot::flow::{BlockOps, Command, FlowProcessor, Hint, VarRef};
use parrot::model::{HeaderLayout, UValue, UWidth};
use parrot::programs;
use parrot::selector::{Criterion, FlowSelector, ProtocolStack};
use parrot::sim::{run_trace, simulate_packet, SimPacket, SimState, Verdict};
use parrot::solution::Solution;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn guess(port: u16, g: u8) -> SimPacket {
    SimPacket::udp(port, 40000, programs::GUESS_PORT, vec![g])
}

#[test]
fn guess_game_matches_comparator_for_all_pairs() {
    let s = programs::guess_game(Hint::IfElse).unwrap();
    let base = SimState::new(&s, 2024);
    for secret in 0..=255u8 {
        for g in 0..=255u8 {
            let mut st = base.clone();
            st.set_shared("guess_game", "secret", UValue::u8(secret)).unwrap();
            let mut draw = st.rng().clone();
            let r = st.step(&s, &guess(3, g)).unwrap();
            assert_eq!(r.packet.payload, common::comparator(secret, g), "secret {secret} guess {g}");
            let now = st.shared("guess_game", "secret").unwrap();
            if g == secret {
                assert_eq!(now, UValue::u8(draw.next_u64() as u8));
            } else {
                assert_eq!(now, UValue::u8(secret));
            }
        }
    }
}

/// Depth-8 three-way search trees cover 255 values, so exactly one of the
/// 256 secrets needs a ninth guess.
#[test]
fn binary_search_wins_within_nine_guesses() {
    let s = programs::guess_game(Hint::IfElse).unwrap();
    let mut needed_nine = 0;
    for secret in 0..=255u8 {
        let mut st = SimState::new(&s, 1);
        st.set_shared("guess_game", "secret", UValue::u8(secret)).unwrap();
        let (mut lo, mut hi) = (0u16, 255u16);
        let mut tries = 0;
        loop {
            let mid = ((lo + hi) / 2) as u8;
            tries += 1;
            let r = st.step(&s, &guess(0, mid)).unwrap();
            match &r.packet.payload[..] {
                b"OK" => break,
                b"GT" => lo = mid as u16 + 1,
                b"LT" => hi = mid as u16 - 1,
                other => panic!("unexpected reply {other:?}"),
            }
        }
        assert!(tries <= 9, "secret {secret} took {tries}");
        needed_nine += (tries == 9) as u32;
    }
    assert_eq!(needed_nine, 1);
}

fn adder() -> Solution {
    let mut p = FlowProcessor::builder("adder", HeaderLayout::of("ab", &[("a", UWidth::U8), ("b", UWidth::U8)]).unwrap())
        .output(HeaderLayout::of("sd", &[("s", UWidth::U8), ("d", UWidth::U8)]).unwrap())
        .build()
        .unwrap();
    p.body()
        .add(Command::add(VarRef::output("s"), VarRef::input("a"), VarRef::input("b")))
        .unwrap()
        .add(Command::sub(VarRef::output("d"), VarRef::input("a"), VarRef::input("b")))
        .unwrap();
    let sel = FlowSelector::new(
        "adder_sel",
        ProtocolStack::Ipv4Udp,
        vec![Criterion::new("udp.dstPort", UValue::u16(9000))],
        None,
        Arc::new(p),
    )
    .unwrap();
    Solution::with_defaults(vec![sel]).unwrap()
}

#[test]
fn u8_add_and_sub_wrap_exhaustively() {
    let s = adder();
    let st = SimState::new(&s, 0);
    for a in 0..=255u32 {
        for b in 0..=255u32 {
            let (r, _) = simulate_packet(&s, &st, &SimPacket::udp(0, 1, 9000, vec![a as u8, b as u8])).unwrap();
            assert_eq!(r.packet.payload, [((a + b) % 256) as u8, ((a + 256 - b) % 256) as u8]);
        }
    }
}

/// A packet for one of the shipped programs, with a payload that may be
/// short, exact, or carry a residual.
fn random_packet(rng: &mut ChaCha8Rng) -> SimPacket {
    match rng.gen_range(0..5) {
        0 => common::random_udp(rng, programs::GUESS_PORT, 0, 6),
        1 => common::random_udp(rng, programs::AGG_PORT, 6, 24),
        2 => common::random_udp(rng, programs::RING_PORT, 3, 10),
        3 => {
            let mut payload = common::random_payload(rng, 0, 12);
            if rng.gen_bool(0.7) && !payload.is_empty() {
                payload[0] = 0xA5;
            }
            SimPacket::tcp(rng.gen_range(0..64), rng.gen(), programs::DISPATCH_PORT, payload)
        }
        _ => {
            let port = rng.gen_range(1..5000);
            common::random_udp(rng, port, 0, 16)
        }
    }
}

fn program_for(name: &str, hint: Hint) -> Solution {
    match name {
        "guess_game" => programs::guess_game(hint).unwrap(),
        "opcode_dispatch" => programs::opcode_dispatch(hint).unwrap(),
        "insert_agg" => programs::insert_agg().unwrap(),
        _ => programs::ring_log().unwrap(),
    }
}

const NAMES: [&str; 4] = ["guess_game", "insert_agg", "ring_log", "opcode_dispatch"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lengths_and_checksums_hold(seed in any::<u64>(), which in 0usize..4) {
        let s = program_for(NAMES[which], Hint::IfElse);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = SimState::new(&s, seed);
        for _ in 0..20 {
            let p = random_packet(&mut rng);
            let before = st.clone();
            match st.step(&s, &p) {
                Ok(r) => match &r.verdict {
                    Verdict::Processed(sel) => {
                        let proc = s.selectors().iter().find(|x| x.name() == sel).unwrap().processor().clone();
                        let in_size = proc.input().byte_size() as i64;
                        let out_size = proc.output().map_or(in_size, |o| o.byte_size() as i64);
                        let residual = p.payload.len() as i64 - in_size;
                        let dropped = if proc.output().is_some() && proc.truncate_payload() { residual } else { 0 };
                        let a = p.ipv4.unwrap().total_len as i64;
                        let b = r.packet.ipv4.unwrap().total_len as i64;
                        prop_assert_eq!(b - a, (out_size - in_size) - dropped);
                        prop_assert_eq!(r.packet.payload.len() as i64, p.payload.len() as i64 + b - a);
                        prop_assert!(common::header_verifies(&r.packet.ipv4.unwrap().to_bytes()));
                        if let Some(u) = r.packet.udp_header() {
                            prop_assert_eq!(u.len as usize, 8 + r.packet.payload.len());
                            if proc.output().is_some() {
                                prop_assert_eq!(u.checksum, 0);
                            }
                        }
                        prop_assert!(!r.trace.is_empty());
                    }
                    Verdict::Passthrough => {
                        prop_assert_eq!(&r.packet, &p);
                        prop_assert_eq!(&st, &before);
                    }
                },
                Err(_) => prop_assert_eq!(&st, &before),
            }
        }
    }

    #[test]
    fn hints_do_not_change_results(seed in any::<u64>(), which in prop::sample::select(vec![0usize, 3])) {
        let a = program_for(NAMES[which], Hint::IfElse);
        let b = program_for(NAMES[which], Hint::Table);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let packets: Vec<SimPacket> = (0..40).map(|_| random_packet(&mut rng)).collect();
        prop_assert_eq!(run_trace(&a, &packets, seed), run_trace(&b, &packets, seed));
    }

    #[test]
    fn unmatched_packets_pass_untouched(seed in any::<u64>(), port in 0u16..5000) {
        prop_assume!(![programs::GUESS_PORT, programs::AGG_PORT, programs::RING_PORT].contains(&port));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (_, s) in programs::all().unwrap() {
            let st = SimState::new(&s, seed);
            let p = common::random_udp(&mut rng, port, 0, 32);
            let (r, next) = simulate_packet(&s, &st, &p).unwrap();
            prop_assert_eq!(r.verdict, Verdict::Passthrough);
            prop_assert_eq!(&r.packet, &p);
            prop_assert_eq!(next, st);
        }
    }
}
