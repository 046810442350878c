//! Link/network/transport header decoding down to the 5-tuple.

use std::cmp::Ordering;
use std::fmt;
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};

use serde::{Deserialize, Serialize};

use super::pcap::{LINKTYPE_ETHERNET, LINKTYPE_RAW};

const ETHERTYPE_IPV4: u16 = 0x0800;
const ETHERTYPE_IPV6: u16 = 0x86DD;
const ETHERTYPE_VLAN: u16 = 0x8100;
const ETHERTYPE_QINQ: u16 = 0x88A8;
const IPPROTO_TCP: u8 = 6;
const IPPROTO_UDP: u8 = 17;
// BSD raw-IP DLT, seen in some older captures.
const DLT_RAW_BSD: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Protocol {
    Tcp,
    Udp,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Tcp => "TCP",
            Protocol::Udp => "UDP",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub ip: IpAddr,
    pub port: u16,
}

impl Endpoint {
    pub fn new(ip: impl Into<IpAddr>, port: u16) -> Self {
        Endpoint { ip: ip.into(), port }
    }
}

// Lexicographic on (ip, port); IPv4 sorts before IPv6.
impl Ord for Endpoint {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.ip, self.port).cmp(&(other.ip, other.port))
    }
}

impl PartialOrd for Endpoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ip {
            IpAddr::V4(ip) => write!(f, "{ip}:{}", self.port),
            IpAddr::V6(ip) => write!(f, "[{ip}]:{}", self.port),
        }
    }
}

/// Directed 5-tuple of one packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FiveTuple {
    pub src: Endpoint,
    pub dst: Endpoint,
    pub protocol: Protocol,
}

impl FiveTuple {
    pub fn reversed(self) -> Self {
        FiveTuple { src: self.dst, dst: self.src, protocol: self.protocol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NonFlowReason {
    NotIp,
    NotTcpUdp,
    Fragment,
    UnsupportedLinktype,
    Malformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameClass {
    Flow(FiveTuple),
    NonFlow(NonFlowReason),
}

impl FrameClass {
    pub fn key(&self) -> Option<super::FlowKey> {
        match self {
            FrameClass::Flow(t) => Some(super::FlowKey::from(*t)),
            FrameClass::NonFlow(_) => None,
        }
    }
}

/// Decode a captured frame. Never fails: anything that is not a well-formed
/// IPv4/IPv6 TCP/UDP packet comes back as `NonFlow`.
pub fn classify_packet(frame: &[u8], linktype: u32) -> FrameClass {
    let ip = match linktype {
        LINKTYPE_ETHERNET => match strip_ethernet(frame) {
            Ok(ip) => ip,
            Err(reason) => return FrameClass::NonFlow(reason),
        },
        LINKTYPE_RAW | DLT_RAW_BSD => frame,
        _ => return FrameClass::NonFlow(NonFlowReason::UnsupportedLinktype),
    };
    match classify_ip(ip) {
        Ok(t) => FrameClass::Flow(t),
        Err(reason) => FrameClass::NonFlow(reason),
    }
}

fn strip_ethernet(frame: &[u8]) -> Result<&[u8], NonFlowReason> {
    if frame.len() < 14 {
        return Err(NonFlowReason::Malformed);
    }
    let mut ethertype = u16::from_be_bytes([frame[12], frame[13]]);
    let mut off = 14;
    while ethertype == ETHERTYPE_VLAN || ethertype == ETHERTYPE_QINQ {
        if frame.len() < off + 4 {
            return Err(NonFlowReason::Malformed);
        }
        ethertype = u16::from_be_bytes([frame[off + 2], frame[off + 3]]);
        off += 4;
    }
    match ethertype {
        ETHERTYPE_IPV4 | ETHERTYPE_IPV6 => Ok(&frame[off..]),
        _ => Err(NonFlowReason::NotIp),
    }
}

fn classify_ip(ip: &[u8]) -> Result<FiveTuple, NonFlowReason> {
    let version = ip.first().ok_or(NonFlowReason::Malformed)? >> 4;
    let (src, dst, proto, l4) = match version {
        4 => {
            if ip.len() < 20 {
                return Err(NonFlowReason::Malformed);
            }
            let ihl = (ip[0] & 0x0f) as usize * 4;
            if ihl < 20 || ip.len() < ihl {
                return Err(NonFlowReason::Malformed);
            }
            let frag_offset = u16::from_be_bytes([ip[6], ip[7]]) & 0x1fff;
            if frag_offset != 0 {
                return Err(NonFlowReason::Fragment);
            }
            let src = Ipv4Addr::new(ip[12], ip[13], ip[14], ip[15]);
            let dst = Ipv4Addr::new(ip[16], ip[17], ip[18], ip[19]);
            (IpAddr::V4(src), IpAddr::V4(dst), ip[9], &ip[ihl..])
        }
        6 => {
            if ip.len() < 40 {
                return Err(NonFlowReason::Malformed);
            }
            let src: [u8; 16] = ip[8..24].try_into().unwrap();
            let dst: [u8; 16] = ip[24..40].try_into().unwrap();
            (IpAddr::V6(Ipv6Addr::from(src)), IpAddr::V6(Ipv6Addr::from(dst)), ip[6], &ip[40..])
        }
        _ => return Err(NonFlowReason::NotIp),
    };
    let protocol = match proto {
        IPPROTO_TCP => Protocol::Tcp,
        IPPROTO_UDP => Protocol::Udp,
        _ => return Err(NonFlowReason::NotTcpUdp),
    };
    if l4.len() < 4 {
        return Err(NonFlowReason::Malformed);
    }
    let sport = u16::from_be_bytes([l4[0], l4[1]]);
    let dport = u16::from_be_bytes([l4[2], l4[3]]);
    Ok(FiveTuple {
        src: Endpoint::new(src, sport),
        dst: Endpoint::new(dst, dport),
        protocol,
    })
}

/// Build a minimal frame (headers only) carrying `tuple`. Used for fixtures
/// and for exporting synthetic flows as pcap.
pub fn build_frame(tuple: &FiveTuple, linktype: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(74);
    if linktype == LINKTYPE_ETHERNET {
        out.extend_from_slice(&[0x02, 0, 0, 0, 0, 2, 0x02, 0, 0, 0, 0, 1]);
        let et = match tuple.src.ip {
            IpAddr::V4(_) => ETHERTYPE_IPV4,
            IpAddr::V6(_) => ETHERTYPE_IPV6,
        };
        out.extend_from_slice(&et.to_be_bytes());
    }
    let proto = match tuple.protocol {
        Protocol::Tcp => IPPROTO_TCP,
        Protocol::Udp => IPPROTO_UDP,
    };
    let l4_len: u16 = if proto == IPPROTO_TCP { 20 } else { 8 };
    match (tuple.src.ip, tuple.dst.ip) {
        (IpAddr::V4(s), IpAddr::V4(d)) => {
            out.extend_from_slice(&[0x45, 0]);
            out.extend_from_slice(&(20 + l4_len).to_be_bytes());
            out.extend_from_slice(&[0, 0, 0x40, 0, 64, proto, 0, 0]);
            out.extend_from_slice(&s.octets());
            out.extend_from_slice(&d.octets());
        }
        (s, d) => {
            let to6 = |ip: IpAddr| match ip {
                IpAddr::V4(v) => v.to_ipv6_mapped(),
                IpAddr::V6(v) => v,
            };
            out.extend_from_slice(&[0x60, 0, 0, 0]);
            out.extend_from_slice(&l4_len.to_be_bytes());
            out.extend_from_slice(&[proto, 64]);
            out.extend_from_slice(&to6(s).octets());
            out.extend_from_slice(&to6(d).octets());
        }
    }
    out.extend_from_slice(&tuple.src.port.to_be_bytes());
    out.extend_from_slice(&tuple.dst.port.to_be_bytes());
    out.resize(out.len() + l4_len as usize - 4, 0);
    out
}
