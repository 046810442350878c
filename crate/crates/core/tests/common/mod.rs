#![allow(dead_code)]

use snnflow::ingest::{build_frame, Direction, FiveTuple, Flow, PcapWriter, TimeResolution, LINKTYPE_ETHERNET};
use snnflow::synth::synthetic_key;

/// Capture start used when writing flows to pcap.
pub const BASE_SECS: f64 = 1_600_000_000.0;

/// Interleave every packet of `flows` into one Ethernet/µs capture, in time
/// order (ties keep flow order). Forward packets travel from the key's first
/// endpoint. Flows without a key get one derived from their id.
pub fn flows_to_pcap(flows: &[Flow]) -> Vec<u8> {
    let mut events: Vec<(f64, usize, usize)> = Vec::new();
    for (fi, f) in flows.iter().enumerate() {
        for (pi, p) in f.packets.iter().enumerate() {
            events.push((p.ts, fi, pi));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut w = PcapWriter::new(LINKTYPE_ETHERNET, TimeResolution::Micros, false);
    for (ts, fi, pi) in events {
        let f = &flows[fi];
        let key = f.key.unwrap_or_else(|| synthetic_key(f.id));
        let fwd = FiveTuple { src: key.endpoint_a, dst: key.endpoint_b, protocol: key.protocol };
        let p = &f.packets[pi];
        let tuple = if p.dir == Direction::Forward { fwd } else { fwd.reversed() };
        w.record_at(BASE_SECS + ts, p.wire_len as u32, &build_frame(&tuple, LINKTYPE_ETHERNET));
    }
    w.into_bytes()
}
