//! Packet CSV logs: `flow_id,ts,wire_len,dir`, one packet per row.

use std::collections::HashMap;
use std::fmt::Write;

use super::flow::{Direction, Flow, PacketRecord};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "flow_id,ts,wire_len,dir";

/// Timestamps are written with 6 decimals.
pub fn write_packet_csv(flows: &[Flow]) -> String {
    let rows: usize = flows.iter().map(|f| f.packets.len()).sum();
    let mut out = String::with_capacity(24 * (rows + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for flow in flows {
        for p in &flow.packets {
            writeln!(out, "{},{:.6},{},{}", flow.id, p.ts, p.wire_len, p.dir.as_char()).unwrap();
        }
    }
    out
}

/// Parse a packet CSV. Flows come back in first-appearance order with their
/// packets time-sorted. Any bad row rejects the whole file; line numbers are
/// 1-based with the header on line 1.
pub fn read_packet_csv(text: &str) -> Result<Vec<Flow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((_, h)) => return Err(Error::row(1, format!("expected header `{CSV_HEADER}`, got `{h}`"))),
        None => return Err(Error::row(1, "missing header")),
    }
    let mut order: Vec<u64> = Vec::new();
    let mut by_id: HashMap<u64, Vec<PacketRecord>> = HashMap::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::row(line_no, format!("expected 4 fields, got {}", fields.len())));
        }
        let id: u64 = fields[0]
            .parse()
            .map_err(|_| Error::row(line_no, format!("bad flow_id `{}`", fields[0])))?;
        let ts: f64 = fields[1]
            .parse()
            .ok()
            .filter(|t: &f64| t.is_finite() && *t >= 0.0)
            .ok_or_else(|| Error::row(line_no, format!("bad ts `{}`", fields[1])))?;
        let wire_len: u16 = fields[2]
            .parse()
            .map_err(|_| Error::row(line_no, format!("bad wire_len `{}`", fields[2])))?;
        let dir = match fields[3] {
            "F" => Direction::Forward,
            "B" => Direction::Backward,
            d => return Err(Error::row(line_no, format!("bad dir `{d}`"))),
        };
        by_id
            .entry(id)
            .or_insert_with(|| {
                order.push(id);
                Vec::new()
            })
            .push(PacketRecord { ts, wire_len, dir });
    }
    Ok(order
        .into_iter()
        .map(|id| Flow::new(id, None, by_id.remove(&id).unwrap()))
        .collect())
}
