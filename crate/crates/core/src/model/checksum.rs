//! Internet checksum (RFC 1071).

/// One's-complement sum of big-endian 16-bit words, folded to 16 bits.
/// An odd trailing byte is padded with a zero byte.
pub fn ones_complement_sum(data: &[u8]) -> u16 {
    let mut sum: u64 = data
        .chunks(2)
        .map(|c| u64::from(u16::from_be_bytes([c[0], c.get(1).copied().unwrap_or(0)])))
        .sum();
    while sum > 0xFFFF {
        sum = (sum & 0xFFFF) + (sum >> 16);
    }
    sum as u16
}

pub fn internet_checksum(data: &[u8]) -> u16 {
    !ones_complement_sum(data)
}

/// True when `data`, checksum field included, sums to `0xFFFF`.
pub fn verifies(data: &[u8]) -> bool {
    ones_complement_sum(data) == 0xFFFF
}
