#![allow(dead_code)]

pub mod builder_model;
pub mod overlap;
pub mod pipeline;
pub mod p4scan;

use std::path::{Path, PathBuf};

use parrot::sim::SimPacket;
use rand::Rng;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_dir(name: &str) -> PathBuf {
    manifest_dir().join("tests").join("golden").join(name)
}

pub fn asset(rel: &str) -> PathBuf {
    manifest_dir().join("assets").join(rel)
}

pub fn blessing() -> bool {
    std::env::var_os("PARROT_BLESS").is_some_and(|v| v == "1")
}

/// Compares `files` against `dir`. With `PARROT_BLESS=1` (and `allow_bless`)
/// the directory is rewritten instead.
pub fn check_golden(dir: &Path, files: &[(String, &str)], allow_bless: bool) -> Result<(), String> {
    if allow_bless && blessing() {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        for (name, text) in files {
            std::fs::write(dir.join(name), text).map_err(|e| e.to_string())?;
        }
        return Ok(());
    }
    for (name, text) in files {
        let path = dir.join(name);
        let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        if want != *text {
            let line = want
                .lines()
                .zip(text.lines())
                .position(|(a, b)| a != b)
                .map_or_else(|| "length".to_string(), |i| format!("line {}", i + 1));
            return Err(format!("{} differs from golden at {line}", path.display()));
        }
    }
    Ok(())
}

/// RFC 1071 checksum, computed the slow way: 16-bit one's-complement
/// additions with the end-around carry applied after every word.
pub fn naive_checksum(bytes: &[u8]) -> u16 {
    let mut acc: u16 = 0;
    let mut i = 0;
    while i < bytes.len() {
        let hi = bytes[i] as u16;
        let lo = if i + 1 < bytes.len() { bytes[i + 1] as u16 } else { 0 };
        let (s, carry) = acc.overflowing_add((hi << 8) | lo);
        acc = s + carry as u16;
        i += 2;
    }
    !acc
}

pub fn header_verifies(bytes: &[u8]) -> bool {
    naive_checksum(bytes) == 0
}

/// Guess-game reply for one guess against a secret.
pub fn comparator(secret: u8, guess: u8) -> [u8; 2] {
    match guess.cmp(&secret) {
        std::cmp::Ordering::Less => *b"GT",
        std::cmp::Ordering::Greater => *b"LT",
        std::cmp::Ordering::Equal => *b"OK",
    }
}

pub fn random_payload(rng: &mut impl Rng, min: usize, max: usize) -> Vec<u8> {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| rng.gen()).collect()
}

/// UDP packet with randomized addresses, ports, TTL and a payload of
/// `min..=max` random bytes.
pub fn random_udp(rng: &mut impl Rng, dst_port: u16, min: usize, max: usize) -> SimPacket {
    let payload = random_payload(rng, min, max);
    let mut p = SimPacket::udp(rng.gen_range(0..512), rng.gen(), dst_port, payload);
    let ip = p.ipv4.as_mut().unwrap();
    ip.src_addr = rng.gen();
    ip.dst_addr = rng.gen();
    ip.ttl = rng.gen_range(1..=255);
    ip.identification = rng.gen();
    p.fix_checksums();
    p
}
