//! JSON trace files for the simulator.
//!
//! Input: `{"seed": 7, "packets": [...]}`. Each packet lists the standard
//! header fields it cares about (numbers or decimal / `0x` hex strings) and
//! its payload as a hex string. Missing lengths and checksums are computed.
//! Output mirrors the input packet format, so a result packet can be fed
//! back in.

use std::path::Path;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::program::{Number, ProgramError};
use crate::sim::{
    EthHeader, Ipv4Header, SimError, SimPacket, SimResult, TcpHeader, TraceEvent, UdpHeader, Verdict, L4,
};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Num>,
    #[serde(default)]
    pub packets: Vec<PacketDoc>,
}

/// Unsigned number that reads like [`Number`] and writes as a JSON number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Num(pub u64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.0)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Number::deserialize(d).map(|Number(n)| Num(n))
    }
}

fn narrow<T: TryFrom<u64>>(n: Option<Num>, field: &str) -> Result<Option<T>, String> {
    n.map(|Num(v)| T::try_from(v).map_err(|_| format!("`{field}` value {v} is out of range")))
        .transpose()
}

/// Bytes written as a hex string; whitespace is ignored on input.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HexBytes(pub Vec<u8>);

impl Serialize for HexBytes {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(&self.0))
    }
}

impl<'de> Deserialize<'de> for HexBytes {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        hex::decode(&compact)
            .map(HexBytes)
            .map_err(|e| de::Error::custom(format!("invalid hex payload: {e}")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EthDoc {
    #[serde(rename = "dstAddr", default, skip_serializing_if = "Option::is_none")]
    pub dst_addr: Option<Num>,
    #[serde(rename = "srcAddr", default, skip_serializing_if = "Option::is_none")]
    pub src_addr: Option<Num>,
    #[serde(rename = "etherType", default, skip_serializing_if = "Option::is_none")]
    pub ether_type: Option<Num>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ipv4Doc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffserv: Option<Num>,
    #[serde(rename = "totalLen", default, skip_serializing_if = "Option::is_none")]
    pub total_len: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identification: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags: Option<Num>,
    #[serde(rename = "fragOffset", default, skip_serializing_if = "Option::is_none")]
    pub frag_offset: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ttl: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<Num>,
    #[serde(rename = "hdrChecksum", default, skip_serializing_if = "Option::is_none")]
    pub hdr_checksum: Option<Num>,
    #[serde(rename = "srcAddr", default, skip_serializing_if = "Option::is_none")]
    pub src_addr: Option<Num>,
    #[serde(rename = "dstAddr", default, skip_serializing_if = "Option::is_none")]
    pub dst_addr: Option<Num>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UdpDoc {
    #[serde(rename = "srcPort", default, skip_serializing_if = "Option::is_none")]
    pub src_port: Option<Num>,
    #[serde(rename = "dstPort", default, skip_serializing_if = "Option::is_none")]
    pub dst_port: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub len: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<Num>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TcpDoc {
    #[serde(rename = "srcPort", default, skip_serializing_if = "Option::is_none")]
    pub src_port: Option<Num>,
    #[serde(rename = "dstPort", default, skip_serializing_if = "Option::is_none")]
    pub dst_port: Option<Num>,
    #[serde(rename = "seqNo", default, skip_serializing_if = "Option::is_none")]
    pub seq_no: Option<Num>,
    #[serde(rename = "ackNo", default, skip_serializing_if = "Option::is_none")]
    pub ack_no: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<Num>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketDoc {
    #[serde(default)]
    pub ingress_port: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eth: Option<EthDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ipv4: Option<Ipv4Doc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub udp: Option<UdpDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tcp: Option<TcpDoc>,
    #[serde(default)]
    pub payload: HexBytes,
}

macro_rules! set {
    ($dst:expr, $src:expr, $name:literal) => {
        if let Some(v) = narrow($src, $name)? {
            $dst = v;
        }
    };
}

impl PacketDoc {
    /// Builds the packet, computing whatever lengths and checksums are not
    /// given explicitly.
    pub fn to_packet(&self) -> Result<SimPacket, String> {
        if self.udp.is_some() && self.tcp.is_some() {
            return Err("a packet has either `udp` or `tcp`, not both".into());
        }
        let mut eth = EthHeader::default();
        if let Some(e) = &self.eth {
            set!(eth.dst_addr, e.dst_addr, "dstAddr");
            set!(eth.src_addr, e.src_addr, "srcAddr");
            set!(eth.ether_type, e.ether_type, "etherType");
            if eth.dst_addr >> 48 != 0 || eth.src_addr >> 48 != 0 {
                return Err("MAC addresses are 48 bits".into());
            }
        }
        let has_ip = self.ipv4.is_some() || self.udp.is_some() || self.tcp.is_some() || eth.ether_type == crate::sim::ETHERTYPE_IPV4;
        let mut ip = has_ip.then(Ipv4Header::default);
        let l4 = match (&self.udp, &self.tcp) {
            (Some(u), None) => {
                let mut h = UdpHeader::default();
                set!(h.src_port, u.src_port, "srcPort");
                set!(h.dst_port, u.dst_port, "dstPort");
                Some(L4::Udp(h))
            }
            (None, Some(t)) => {
                let mut h = TcpHeader::default();
                set!(h.src_port, t.src_port, "srcPort");
                set!(h.dst_port, t.dst_port, "dstPort");
                set!(h.seq_no, t.seq_no, "seqNo");
                set!(h.ack_no, t.ack_no, "ackNo");
                set!(h.flags, t.flags, "flags");
                set!(h.window, t.window, "window");
                Some(L4::Tcp(h))
            }
            _ => None,
        };
        if let Some(ip) = &mut ip {
            ip.protocol = match l4 {
                Some(L4::Tcp(_)) => 6,
                Some(L4::Udp(_)) => 17,
                None => 0xFD,
            };
            if let Some(d) = &self.ipv4 {
                set!(ip.diffserv, d.diffserv, "diffserv");
                set!(ip.identification, d.identification, "identification");
                set!(ip.flags, d.flags, "flags");
                set!(ip.frag_offset, d.frag_offset, "fragOffset");
                set!(ip.ttl, d.ttl, "ttl");
                set!(ip.protocol, d.protocol, "protocol");
                set!(ip.src_addr, d.src_addr, "srcAddr");
                set!(ip.dst_addr, d.dst_addr, "dstAddr");
            }
        }
        let mut p = SimPacket {
            ingress_port: narrow(self.ingress_port, "ingress_port")?.unwrap_or(0),
            eth,
            ipv4: ip,
            l4,
            payload: self.payload.0.clone(),
        };
        p.fix_lengths();
        if let (Some(ip), Some(d)) = (&mut p.ipv4, &self.ipv4) {
            set!(ip.total_len, d.total_len, "totalLen");
        }
        if let (Some(L4::Udp(h)), Some(u)) = (&mut p.l4, &self.udp) {
            set!(h.len, u.len, "len");
        }
        p.fix_checksums();
        if let (Some(ip), Some(d)) = (&mut p.ipv4, &self.ipv4) {
            set!(ip.hdr_checksum, d.hdr_checksum, "hdrChecksum");
        }
        match (&mut p.l4, &self.udp, &self.tcp) {
            (Some(L4::Udp(h)), Some(u), _) => set!(h.checksum, u.checksum, "checksum"),
            (Some(L4::Tcp(h)), _, Some(t)) => set!(h.checksum, t.checksum, "checksum"),
            _ => {}
        }
        Ok(p)
    }

    /// Every field spelled out.
    pub fn from_packet(p: &SimPacket) -> PacketDoc {
        let n = |v: u64| Some(Num(v));
        PacketDoc {
            ingress_port: n(p.ingress_port.into()),
            eth: Some(EthDoc {
                dst_addr: n(p.eth.dst_addr),
                src_addr: n(p.eth.src_addr),
                ether_type: n(p.eth.ether_type.into()),
            }),
            ipv4: p.ipv4.map(|ip| Ipv4Doc {
                diffserv: n(ip.diffserv.into()),
                total_len: n(ip.total_len.into()),
                identification: n(ip.identification.into()),
                flags: n(ip.flags.into()),
                frag_offset: n(ip.frag_offset.into()),
                ttl: n(ip.ttl.into()),
                protocol: n(ip.protocol.into()),
                hdr_checksum: n(ip.hdr_checksum.into()),
                src_addr: n(ip.src_addr.into()),
                dst_addr: n(ip.dst_addr.into()),
            }),
            udp: p.udp_header().map(|u| UdpDoc {
                src_port: n(u.src_port.into()),
                dst_port: n(u.dst_port.into()),
                len: n(u.len.into()),
                checksum: n(u.checksum.into()),
            }),
            tcp: p.tcp_header().map(|t| TcpDoc {
                src_port: n(t.src_port.into()),
                dst_port: n(t.dst_port.into()),
                seq_no: n(t.seq_no.into()),
                ack_no: n(t.ack_no.into()),
                flags: n(t.flags.into()),
                window: n(t.window.into()),
                checksum: n(t.checksum.into()),
            }),
            payload: HexBytes(p.payload.clone()),
        }
    }
}

impl TraceDoc {
    pub fn from_json(text: &str) -> Result<TraceDoc, ProgramError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| ProgramError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<TraceDoc, ProgramError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProgramError::Io {
            path: path.display().to_string(),
            source,
        })?;
        TraceDoc::from_json(&text)
    }

    pub fn from_packets(seed: Option<u64>, packets: &[SimPacket]) -> TraceDoc {
        TraceDoc {
            seed: seed.map(Num),
            packets: packets.iter().map(PacketDoc::from_packet).collect(),
        }
    }

    pub fn packets(&self) -> Result<Vec<SimPacket>, ProgramError> {
        self.packets
            .iter()
            .enumerate()
            .map(|(i, p)| {
                p.to_packet().map_err(|message| ProgramError::Schema {
                    path: format!("packets[{i}]"),
                    message,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trace documents always serialize");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventDoc {
    pub ordinal: u32,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub before: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub operands: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub atomic: bool,
}

impl From<&TraceEvent> for EventDoc {
    fn from(e: &TraceEvent) -> Self {
        EventDoc {
            ordinal: e.ordinal,
            kind: e.kind.clone(),
            target: e.target.clone(),
            before: e.before.map(|v| v.to_string()),
            after: e.after.map(|v| v.to_string()),
            operands: e.operands.iter().map(|v| v.to_string()).collect(),
            atomic: e.atomic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selector: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub egress_port: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_hex: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet: Option<PacketDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<EventDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultDoc {
    pub fn new(index: usize, r: &Result<SimResult, SimError>, with_trace: bool) -> ResultDoc {
        match r {
            Ok(r) => {
                let (verdict, selector) = match &r.verdict {
                    Verdict::Processed(s) => ("PROCESSED", Some(s.clone())),
                    Verdict::Passthrough => ("PASSTHROUGH", None),
                };
                ResultDoc {
                    index,
                    verdict: Some(verdict.into()),
                    selector,
                    egress_port: Some(r.egress_port),
                    payload_hex: Some(hex::encode(&r.packet.payload)),
                    packet: Some(PacketDoc::from_packet(&r.packet)),
                    trace: with_trace.then(|| r.trace.iter().map(EventDoc::from).collect()),
                    error: None,
                }
            }
            Err(e) => ResultDoc {
                index,
                verdict: None,
                selector: None,
                egress_port: None,
                payload_hex: None,
                packet: None,
                trace: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultsDoc {
    pub seed: u64,
    pub results: Vec<ResultDoc>,
}

impl ResultsDoc {
    pub fn new(seed: u64, results: &[Result<SimResult, SimError>], with_trace: bool) -> ResultsDoc {
        ResultsDoc {
            seed,
            results: results
                .iter()
                .enumerate()
                .map(|(i, r)| ResultDoc::new(i, r, with_trace))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result documents always serialize");
        s.push('\n');
        s
    }
}
