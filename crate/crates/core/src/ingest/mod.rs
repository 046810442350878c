//! Capture ingest: classic pcap files and packet CSV logs into bidirectional flows.

mod csv;
mod flow;
mod frame;
mod pcap;

pub use self::csv::{read_packet_csv, write_packet_csv, CSV_HEADER};
pub use flow::{assemble_flows, Direction, Flow, FlowKey, PacketRecord, RawPacket};
pub use frame::{build_frame, classify_packet, Endpoint, FiveTuple, FrameClass, NonFlowReason, Protocol};
pub use pcap::{
    parse_pcap, PcapCapture, PcapRecord, PcapWriter, TimeResolution, LINKTYPE_ETHERNET,
    LINKTYPE_RAW,
};

use crate::Result;

/// Counters gathered while turning one capture into flows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub records: usize,
    pub flow_packets: usize,
    pub non_flow: usize,
    pub malformed: usize,
}

/// Parse a pcap byte stream and assemble its TCP/UDP packets into flows.
pub fn ingest_pcap(bytes: &[u8]) -> Result<(Vec<Flow>, IngestStats)> {
    let capture = parse_pcap(bytes)?;
    let mut stats = IngestStats { records: capture.records.len(), ..Default::default() };
    let mut raw = Vec::with_capacity(capture.records.len());
    for rec in &capture.records {
        match classify_packet(&rec.data, capture.linktype) {
            FrameClass::Flow(tuple) => raw.push(RawPacket {
                ts: rec.ts,
                wire_len: rec.wire_len,
                tuple,
            }),
            FrameClass::NonFlow(NonFlowReason::Malformed) => {
                stats.non_flow += 1;
                stats.malformed += 1;
            }
            FrameClass::NonFlow(_) => stats.non_flow += 1,
        }
    }
    stats.flow_packets = raw.len();
    Ok((assemble_flows(&raw), stats))
}
