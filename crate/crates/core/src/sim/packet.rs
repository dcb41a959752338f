use serde::{Deserialize, Serialize};

use super::SimError;
use crate::model::internet_checksum;
use crate::selector::{ProtocolStack, StandardField};

pub const ETHERTYPE_IPV4: u16 = 0x0800;
pub const ETH_LEN: usize = 14;
pub const IPV4_LEN: usize = 20;
pub const UDP_LEN: usize = 8;
pub const TCP_LEN: usize = 20;

/// MAC addresses are held in the low 48 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EthHeader {
    pub dst_addr: u64,
    pub src_addr: u64,
    pub ether_type: u16,
}

impl Default for EthHeader {
    fn default() -> Self {
        EthHeader {
            dst_addr: 0x0200_0000_0002,
            src_addr: 0x0200_0000_0001,
            ether_type: ETHERTYPE_IPV4,
        }
    }
}

/// Option-less IPv4 header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ipv4Header {
    pub version: u8,
    pub ihl: u8,
    pub diffserv: u8,
    pub total_len: u16,
    pub identification: u16,
    /// 3 bits.
    pub flags: u8,
    /// 13 bits.
    pub frag_offset: u16,
    pub ttl: u8,
    pub protocol: u8,
    pub hdr_checksum: u16,
    pub src_addr: u32,
    pub dst_addr: u32,
}

impl Default for Ipv4Header {
    fn default() -> Self {
        Ipv4Header {
            version: 4,
            ihl: 5,
            diffserv: 0,
            total_len: IPV4_LEN as u16,
            identification: 0,
            flags: 0b010,
            frag_offset: 0,
            ttl: 64,
            protocol: 17,
            hdr_checksum: 0,
            src_addr: 0x0A00_0001,
            dst_addr: 0x0A00_0002,
        }
    }
}

impl Ipv4Header {
    pub fn to_bytes(&self) -> [u8; IPV4_LEN] {
        let mut b = [0u8; IPV4_LEN];
        b[0] = (self.version << 4) | (self.ihl & 0x0F);
        b[1] = self.diffserv;
        b[2..4].copy_from_slice(&self.total_len.to_be_bytes());
        b[4..6].copy_from_slice(&self.identification.to_be_bytes());
        let ff = (u16::from(self.flags & 0x7) << 13) | (self.frag_offset & 0x1FFF);
        b[6..8].copy_from_slice(&ff.to_be_bytes());
        b[8] = self.ttl;
        b[9] = self.protocol;
        b[10..12].copy_from_slice(&self.hdr_checksum.to_be_bytes());
        b[12..16].copy_from_slice(&self.src_addr.to_be_bytes());
        b[16..20].copy_from_slice(&self.dst_addr.to_be_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Ipv4Header, SimError> {
        if b.len() < IPV4_LEN {
            return Err(SimError::Malformed(format!("IPv4 header needs 20 bytes, got {}", b.len())));
        }
        let ff = u16::from_be_bytes([b[6], b[7]]);
        Ok(Ipv4Header {
            version: b[0] >> 4,
            ihl: b[0] & 0x0F,
            diffserv: b[1],
            total_len: u16::from_be_bytes([b[2], b[3]]),
            identification: u16::from_be_bytes([b[4], b[5]]),
            flags: (ff >> 13) as u8,
            frag_offset: ff & 0x1FFF,
            ttl: b[8],
            protocol: b[9],
            hdr_checksum: u16::from_be_bytes([b[10], b[11]]),
            src_addr: u32::from_be_bytes([b[12], b[13], b[14], b[15]]),
            dst_addr: u32::from_be_bytes([b[16], b[17], b[18], b[19]]),
        })
    }

    /// Sets `hdr_checksum` so that the header verifies.
    pub fn update_checksum(&mut self) {
        self.hdr_checksum = 0;
        self.hdr_checksum = internet_checksum(&self.to_bytes());
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UdpHeader {
    pub src_port: u16,
    pub dst_port: u16,
    pub len: u16,
    pub checksum: u16,
}

impl UdpHeader {
    pub fn to_bytes(&self) -> [u8; UDP_LEN] {
        let mut b = [0u8; UDP_LEN];
        b[0..2].copy_from_slice(&self.src_port.to_be_bytes());
        b[2..4].copy_from_slice(&self.dst_port.to_be_bytes());
        b[4..6].copy_from_slice(&self.len.to_be_bytes());
        b[6..8].copy_from_slice(&self.checksum.to_be_bytes());
        b
    }
}

/// Option-less TCP header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TcpHeader {
    pub src_port: u16,
    pub dst_port: u16,
    pub seq_no: u32,
    pub ack_no: u32,
    pub data_offset: u8,
    pub res: u8,
    pub flags: u8,
    pub window: u16,
    pub checksum: u16,
    pub urgent_ptr: u16,
}

impl Default for TcpHeader {
    fn default() -> Self {
        TcpHeader {
            src_port: 0,
            dst_port: 0,
            seq_no: 0,
            ack_no: 0,
            data_offset: 5,
            res: 0,
            flags: 0x18,
            window: 0xFFFF,
            checksum: 0,
            urgent_ptr: 0,
        }
    }
}

impl TcpHeader {
    pub fn to_bytes(&self) -> [u8; TCP_LEN] {
        let mut b = [0u8; TCP_LEN];
        b[0..2].copy_from_slice(&self.src_port.to_be_bytes());
        b[2..4].copy_from_slice(&self.dst_port.to_be_bytes());
        b[4..8].copy_from_slice(&self.seq_no.to_be_bytes());
        b[8..12].copy_from_slice(&self.ack_no.to_be_bytes());
        b[12] = (self.data_offset << 4) | (self.res & 0x0F);
        b[13] = self.flags;
        b[14..16].copy_from_slice(&self.window.to_be_bytes());
        b[16..18].copy_from_slice(&self.checksum.to_be_bytes());
        b[18..20].copy_from_slice(&self.urgent_ptr.to_be_bytes());
        b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum L4 {
    Udp(UdpHeader),
    Tcp(TcpHeader),
}

/// A frame as the simulator sees it: parsed standard headers plus the bytes
/// after them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimPacket {
    pub ingress_port: u16,
    pub eth: EthHeader,
    pub ipv4: Option<Ipv4Header>,
    pub l4: Option<L4>,
    pub payload: Vec<u8>,
}

impl SimPacket {
    /// Well-formed IPv4/UDP packet: lengths and both checksums filled in.
    pub fn udp(ingress_port: u16, src_port: u16, dst_port: u16, payload: Vec<u8>) -> SimPacket {
        let mut p = SimPacket {
            ingress_port,
            eth: EthHeader::default(),
            ipv4: Some(Ipv4Header::default()),
            l4: Some(L4::Udp(UdpHeader {
                src_port,
                dst_port,
                len: 0,
                checksum: 0,
            })),
            payload,
        };
        p.fix_lengths();
        p.fix_checksums();
        p
    }

    /// Well-formed IPv4/TCP packet; the TCP checksum is filled in.
    pub fn tcp(ingress_port: u16, src_port: u16, dst_port: u16, payload: Vec<u8>) -> SimPacket {
        let ip = Ipv4Header {
            protocol: 6,
            ..Ipv4Header::default()
        };
        let mut p = SimPacket {
            ingress_port,
            eth: EthHeader::default(),
            ipv4: Some(ip),
            l4: Some(L4::Tcp(TcpHeader {
                src_port,
                dst_port,
                ..TcpHeader::default()
            })),
            payload,
        };
        p.fix_lengths();
        p.fix_checksums();
        p
    }

    pub fn udp_header(&self) -> Option<&UdpHeader> {
        match &self.l4 {
            Some(L4::Udp(u)) => Some(u),
            _ => None,
        }
    }

    pub fn tcp_header(&self) -> Option<&TcpHeader> {
        match &self.l4 {
            Some(L4::Tcp(t)) => Some(t),
            _ => None,
        }
    }

    fn l4_len(&self) -> usize {
        match self.l4 {
            Some(L4::Udp(_)) => UDP_LEN,
            Some(L4::Tcp(_)) => TCP_LEN,
            None => 0,
        }
    }

    /// Sets `ipv4.totalLen` and `udp.len` from the actual sizes.
    pub fn fix_lengths(&mut self) {
        let l4 = self.l4_len() + self.payload.len();
        if let Some(ip) = &mut self.ipv4 {
            ip.total_len = (IPV4_LEN + l4) as u16;
        }
        if let Some(L4::Udp(u)) = &mut self.l4 {
            u.len = l4 as u16;
        }
    }

    /// Recomputes the IPv4 checksum and the UDP or TCP checksum over the
    /// pseudo header.
    pub fn fix_checksums(&mut self) {
        let Some(ip) = &mut self.ipv4 else { return };
        ip.update_checksum();
        let ip = *ip;
        let mut pseudo = Vec::with_capacity(12 + TCP_LEN + self.payload.len());
        pseudo.extend_from_slice(&ip.src_addr.to_be_bytes());
        pseudo.extend_from_slice(&ip.dst_addr.to_be_bytes());
        pseudo.push(0);
        pseudo.push(ip.protocol);
        let seg_len = (self.l4_len() + self.payload.len()) as u16;
        pseudo.extend_from_slice(&seg_len.to_be_bytes());
        match &mut self.l4 {
            Some(L4::Udp(u)) => {
                u.checksum = 0;
                pseudo.extend_from_slice(&u.to_bytes());
                pseudo.extend_from_slice(&self.payload);
                // Zero means "no checksum" for UDP, so a computed zero is sent as all ones.
                u.checksum = match internet_checksum(&pseudo) {
                    0 => 0xFFFF,
                    c => c,
                };
            }
            Some(L4::Tcp(t)) => {
                t.checksum = 0;
                pseudo.extend_from_slice(&t.to_bytes());
                pseudo.extend_from_slice(&self.payload);
                t.checksum = internet_checksum(&pseudo);
            }
            None => {}
        }
    }

    /// The protocol stack the template parser would reach, or `None` when it
    /// stops before an L4 header.
    pub fn stack(&self) -> Result<Option<ProtocolStack>, SimError> {
        if self.eth.ether_type != ETHERTYPE_IPV4 {
            return Ok(None);
        }
        let Some(ip) = &self.ipv4 else {
            return Err(SimError::Malformed("etherType is IPv4 but no IPv4 header".into()));
        };
        let expected = match ip.protocol {
            17 => Some(ProtocolStack::Ipv4Udp),
            6 => Some(ProtocolStack::Ipv4Tcp),
            _ => None,
        };
        let actual = match self.l4 {
            Some(L4::Udp(_)) => Some(ProtocolStack::Ipv4Udp),
            Some(L4::Tcp(_)) => Some(ProtocolStack::Ipv4Tcp),
            None => None,
        };
        if expected != actual {
            return Err(SimError::Malformed(format!(
                "IPv4 protocol {} does not match the L4 header",
                ip.protocol
            )));
        }
        Ok(expected)
    }

    /// Value of a standard field, if the packet carries its header.
    pub fn field(&self, f: &StandardField) -> Option<u64> {
        let ip = self.ipv4.as_ref();
        Some(match (f.header, f.name) {
            ("eth", "dstAddr") => self.eth.dst_addr,
            ("eth", "srcAddr") => self.eth.src_addr,
            ("eth", "etherType") => self.eth.ether_type.into(),
            ("ipv4", "srcAddr") => ip?.src_addr.into(),
            ("ipv4", "dstAddr") => ip?.dst_addr.into(),
            ("ipv4", "protocol") => ip?.protocol.into(),
            ("ipv4", "totalLen") => ip?.total_len.into(),
            ("ipv4", "ttl") => ip?.ttl.into(),
            ("udp", "srcPort") => self.udp_header()?.src_port.into(),
            ("udp", "dstPort") => self.udp_header()?.dst_port.into(),
            ("udp", "len") => self.udp_header()?.len.into(),
            ("tcp", "srcPort") => self.tcp_header()?.src_port.into(),
            ("tcp", "dstPort") => self.tcp_header()?.dst_port.into(),
            _ => return None,
        })
    }

    /// The frame on the wire.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(ETH_LEN + IPV4_LEN + TCP_LEN + self.payload.len());
        out.extend_from_slice(&self.eth.dst_addr.to_be_bytes()[2..]);
        out.extend_from_slice(&self.eth.src_addr.to_be_bytes()[2..]);
        out.extend_from_slice(&self.eth.ether_type.to_be_bytes());
        if let Some(ip) = &self.ipv4 {
            out.extend_from_slice(&ip.to_bytes());
        }
        match &self.l4 {
            Some(L4::Udp(u)) => out.extend_from_slice(&u.to_bytes()),
            Some(L4::Tcp(t)) => out.extend_from_slice(&t.to_bytes()),
            None => {}
        }
        out.extend_from_slice(&self.payload);
        out
    }
}
