use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::frame::{Endpoint, FiveTuple, Protocol};

/// Undirected conversation identity. `endpoint_a <= endpoint_b` always holds,
/// so both directions of a conversation produce the same key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowKey {
    pub endpoint_a: Endpoint,
    pub endpoint_b: Endpoint,
    pub protocol: Protocol,
}

impl FlowKey {
    pub fn new(x: Endpoint, y: Endpoint, protocol: Protocol) -> Self {
        let (endpoint_a, endpoint_b) = if x <= y { (x, y) } else { (y, x) };
        FlowKey { endpoint_a, endpoint_b, protocol }
    }
}

impl From<FiveTuple> for FlowKey {
    fn from(t: FiveTuple) -> Self {
        FlowKey::new(t.src, t.dst, t.protocol)
    }
}

impl fmt::Display for FlowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} <-> {}", self.protocol, self.endpoint_a, self.endpoint_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn as_char(self) -> char {
        match self {
            Direction::Forward => 'F',
            Direction::Backward => 'B',
        }
    }
}

/// One packet of a flow. Flow membership is carried by the owning [`Flow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketRecord {
    /// Seconds since capture start, finite and non-negative.
    pub ts: f64,
    /// On-wire length in bytes.
    pub wire_len: u16,
    pub dir: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    /// Index of the flow within its capture (first-seen order).
    pub id: u64,
    /// `None` for flows read back from packet CSV, which does not carry addresses.
    pub key: Option<FlowKey>,
    /// Sorted by `ts`, stable with respect to capture order.
    pub packets: Vec<PacketRecord>,
}

impl Flow {
    pub fn new(id: u64, key: Option<FlowKey>, mut packets: Vec<PacketRecord>) -> Self {
        packets.sort_by(|a, b| a.ts.total_cmp(&b.ts));
        Flow { id, key, packets }
    }

    pub fn last_ts(&self) -> Option<f64> {
        self.packets.last().map(|p| p.ts)
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }
}

/// A classified packet before grouping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawPacket {
    pub ts: f64,
    pub wire_len: u16,
    pub tuple: FiveTuple,
}

/// Group packets by canonical 5-tuple. A packet is `Forward` iff its source
/// matches the source of the first packet seen on that key. Flows are
/// returned in first-seen order with ids 0, 1, 2, …
pub fn assemble_flows(records: &[RawPacket]) -> Vec<Flow> {
    let mut index: HashMap<FlowKey, usize> = HashMap::new();
    let mut building: Vec<(FlowKey, Endpoint, Vec<PacketRecord>)> = Vec::new();
    for r in records {
        let key = FlowKey::from(r.tuple);
        let slot = *index.entry(key).or_insert_with(|| {
            building.push((key, r.tuple.src, Vec::new()));
            building.len() - 1
        });
        let (_, anchor, packets) = &mut building[slot];
        let dir = if r.tuple.src == *anchor { Direction::Forward } else { Direction::Backward };
        packets.push(PacketRecord { ts: r.ts, wire_len: r.wire_len, dir });
    }
    building
        .into_iter()
        .enumerate()
        .map(|(id, (key, _, packets))| Flow::new(id as u64, Some(key), packets))
        .collect()
}
