//! Internet checksum over an IPv4 header: compute, patch, verify, and watch
//! a one-bit change break verification.
use parrot::model::{internet_checksum, verifies};
use parrot::sim::Ipv4Header;

fn main() {
    let mut h = Ipv4Header {
        total_len: 60,
        ttl: 17,
        ..Ipv4Header::default()
    };
    h.hdr_checksum = 0;
    let sum = internet_checksum(&h.to_bytes());
    println!("header   {}", hex::encode(h.to_bytes()));
    println!("checksum {sum:#06x}");

    h.hdr_checksum = sum;
    println!("verifies after patch: {}", verifies(&h.to_bytes()));

    h.ttl -= 1;
    println!("verifies after ttl-1: {}", verifies(&h.to_bytes()));
    h.update_checksum();
    println!("verifies after update_checksum: {} ({:#06x})", verifies(&h.to_bytes()), h.hdr_checksum);
}
