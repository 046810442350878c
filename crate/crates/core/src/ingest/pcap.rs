//! Classic libpcap file format (not pcapng).
//!
//! Global header (24 bytes): magic, version major/minor, thiszone, sigfigs,
//! snaplen, linktype. Each record: ts_sec, ts_frac, incl_len, orig_len, then
//! `incl_len` bytes of frame data.

use crate::{Error, Result};

pub const LINKTYPE_ETHERNET: u32 = 1;
pub const LINKTYPE_RAW: u32 = 101;

const MAGIC_MICROS: u32 = 0xA1B2_C3D4;
const MAGIC_NANOS: u32 = 0xA1B2_3C4D;
const GLOBAL_HEADER_LEN: usize = 24;
const RECORD_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeResolution {
    Micros,
    Nanos,
}

impl TimeResolution {
    fn ticks_per_sec(self) -> u64 {
        match self {
            TimeResolution::Micros => 1_000_000,
            TimeResolution::Nanos => 1_000_000_000,
        }
    }
}

/// One captured packet. `ts` is relative to the first record of the file.
#[derive(Debug, Clone, PartialEq)]
pub struct PcapRecord {
    pub ts: f64,
    pub wire_len: u16,
    pub data: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcapCapture {
    pub linktype: u32,
    pub resolution: TimeResolution,
    pub big_endian: bool,
    pub records: Vec<PcapRecord>,
}

#[derive(Clone, Copy)]
struct Reader<'a> {
    bytes: &'a [u8],
    big_endian: bool,
}

impl Reader<'_> {
    fn u32_at(&self, off: usize) -> u32 {
        let b: [u8; 4] = self.bytes[off..off + 4].try_into().unwrap();
        if self.big_endian {
            u32::from_be_bytes(b)
        } else {
            u32::from_le_bytes(b)
        }
    }
}

/// Parse a whole capture held in memory.
///
/// Timestamps are re-based so the first record sits at 0.0. Records stamped
/// earlier than the first one are clamped to 0.0. `wire_len` is the on-wire
/// `orig_len`, saturated to 65535.
pub fn parse_pcap(bytes: &[u8]) -> Result<PcapCapture> {
    if bytes.len() < 4 {
        return Err(Error::TruncatedFile { offset: 0, what: "missing magic" });
    }
    let le_magic = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
    let be_magic = u32::from_be_bytes(bytes[0..4].try_into().unwrap());
    let (big_endian, resolution) = match (le_magic, be_magic) {
        (MAGIC_MICROS, _) => (false, TimeResolution::Micros),
        (MAGIC_NANOS, _) => (false, TimeResolution::Nanos),
        (_, MAGIC_MICROS) => (true, TimeResolution::Micros),
        (_, MAGIC_NANOS) => (true, TimeResolution::Nanos),
        _ => return Err(Error::BadMagic { magic: be_magic, offset: 0 }),
    };
    if bytes.len() < GLOBAL_HEADER_LEN {
        return Err(Error::TruncatedFile { offset: bytes.len(), what: "global header" });
    }
    let rd = Reader { bytes, big_endian };
    let linktype = rd.u32_at(20);
    let tps = resolution.ticks_per_sec();

    let mut records = Vec::new();
    let mut first_ticks: Option<u64> = None;
    let mut off = GLOBAL_HEADER_LEN;
    while off < bytes.len() {
        if bytes.len() - off < RECORD_HEADER_LEN {
            return Err(Error::TruncatedFile { offset: off, what: "record header" });
        }
        let ts_sec = rd.u32_at(off) as u64;
        let ts_frac = rd.u32_at(off + 4) as u64;
        let incl_len = rd.u32_at(off + 8) as usize;
        let orig_len = rd.u32_at(off + 12);
        let data_start = off + RECORD_HEADER_LEN;
        if bytes.len() - data_start < incl_len {
            return Err(Error::TruncatedFile { offset: off, what: "record data" });
        }
        let ticks = ts_sec * tps + ts_frac;
        let origin = *first_ticks.get_or_insert(ticks);
        let ts = ticks.saturating_sub(origin) as f64 / tps as f64;
        records.push(PcapRecord {
            ts,
            wire_len: orig_len.min(u16::MAX as u32) as u16,
            data: bytes[data_start..data_start + incl_len].to_vec(),
        });
        off = data_start + incl_len;
    }
    Ok(PcapCapture { linktype, resolution, big_endian, records })
}

/// Byte-level pcap writer, used to build fixtures and to export synthetic flows.
#[derive(Debug, Clone)]
pub struct PcapWriter {
    buf: Vec<u8>,
    big_endian: bool,
    resolution: TimeResolution,
}

impl PcapWriter {
    pub fn new(linktype: u32, resolution: TimeResolution, big_endian: bool) -> Self {
        let mut w = PcapWriter { buf: Vec::new(), big_endian, resolution };
        let magic = match resolution {
            TimeResolution::Micros => MAGIC_MICROS,
            TimeResolution::Nanos => MAGIC_NANOS,
        };
        w.put_u32(magic);
        w.put_u16(2);
        w.put_u16(4);
        w.put_u32(0); // thiszone
        w.put_u32(0); // sigfigs
        w.put_u32(65535);
        w.put_u32(linktype);
        w
    }

    fn put_u32(&mut self, v: u32) {
        let b = if self.big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
        self.buf.extend_from_slice(&b);
    }

    fn put_u16(&mut self, v: u16) {
        let b = if self.big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
        self.buf.extend_from_slice(&b);
    }

    /// Append a record with an absolute timestamp split into seconds and
    /// sub-second ticks (µs or ns depending on the file's resolution).
    pub fn record(&mut self, ts_sec: u32, ts_frac: u32, orig_len: u32, data: &[u8]) -> &mut Self {
        self.put_u32(ts_sec);
        self.put_u32(ts_frac);
        self.put_u32(data.len() as u32);
        self.put_u32(orig_len);
        self.buf.extend_from_slice(data);
        self
    }

    /// Append a record at `secs` seconds (rounded to the file's tick size).
    pub fn record_at(&mut self, secs: f64, orig_len: u32, data: &[u8]) -> &mut Self {
        let tps = self.resolution.ticks_per_sec();
        let ticks = (secs * tps as f64).round() as u64;
        self.record((ticks / tps) as u32, (ticks % tps) as u32, orig_len, data)
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let mut w = PcapWriter::new(LINKTYPE_ETHERNET, TimeResolution::Micros, false);
        w.record(1_600_000_000, 123, 60, &[0u8; 60]);
        let cap = parse_pcap(&w.into_bytes()).unwrap();
        assert_eq!(cap.linktype, 1);
        assert_eq!(cap.records.len(), 1);
        assert_eq!(cap.records[0].ts, 0.0);
        assert_eq!(cap.records[0].wire_len, 60);
    }

    #[test]
    fn both_endiannesses_agree() {
        let build = |be| {
            let mut w = PcapWriter::new(LINKTYPE_ETHERNET, TimeResolution::Micros, be);
            w.record(100, 0, 60, &[1, 2, 3]).record(100, 250_000, 1514, &[4, 5]);
            w.into_bytes()
        };
        let le = build(false);
        let be = build(true);
        assert_eq!(&le[0..4], &[0xD4, 0xC3, 0xB2, 0xA1]);
        assert_eq!(&be[0..4], &[0xA1, 0xB2, 0xC3, 0xD4]);
        let a = parse_pcap(&le).unwrap();
        let b = parse_pcap(&be).unwrap();
        assert_eq!(a.records, b.records);
        assert!(b.big_endian && !a.big_endian);
    }

    #[test]
    fn two_packets_rebased() {
        let mut w = PcapWriter::new(LINKTYPE_RAW, TimeResolution::Micros, false);
        w.record(100, 0, 40, &[]).record(100, 250_000, 40, &[]);
        let cap = parse_pcap(&w.into_bytes()).unwrap();
        let ts: Vec<f64> = cap.records.iter().map(|r| r.ts).collect();
        assert_eq!(ts, vec![0.0, 0.25]);
    }

    #[test]
    fn nanosecond_variant() {
        let mut w = PcapWriter::new(LINKTYPE_RAW, TimeResolution::Nanos, true);
        w.record(5, 999_999_999, 40, &[]).record(6, 1, 40, &[]);
        let cap = parse_pcap(&w.into_bytes()).unwrap();
        assert_eq!(cap.resolution, TimeResolution::Nanos);
        assert_eq!(cap.records[1].ts, 2e-9);
    }

    #[test]
    fn orig_len_not_caplen() {
        let mut w = PcapWriter::new(LINKTYPE_RAW, TimeResolution::Micros, false);
        w.record(0, 0, 1500, &[0u8; 68]);
        let cap = parse_pcap(&w.into_bytes()).unwrap();
        assert_eq!(cap.records[0].wire_len, 1500);
        assert_eq!(cap.records[0].data.len(), 68);
    }

    #[test]
    fn bad_magic() {
        let err = parse_pcap(&[0u8; 24]).unwrap_err();
        assert!(matches!(err, Error::BadMagic { offset: 0, .. }));
    }

    #[test]
    fn truncated_record_names_offset() {
        let mut w = PcapWriter::new(LINKTYPE_RAW, TimeResolution::Micros, false);
        w.record(0, 0, 40, &[0u8; 40]);
        let mut bytes = w.into_bytes();
        bytes.truncate(bytes.len() - 1);
        match parse_pcap(&bytes).unwrap_err() {
            Error::TruncatedFile { offset, .. } => assert_eq!(offset, 24),
            e => panic!("unexpected {e}"),
        }
        let err = parse_pcap(&bytes[..30]).unwrap_err();
        assert!(matches!(err, Error::TruncatedFile { offset: 24, .. }));
        let err = parse_pcap(&bytes[..10]).unwrap_err();
        assert!(matches!(err, Error::TruncatedFile { offset: 10, .. }));
    }

    #[test]
    fn out_of_order_clamps_to_zero() {
        let mut w = PcapWriter::new(LINKTYPE_RAW, TimeResolution::Micros, false);
        w.record(10, 0, 40, &[]).record(9, 0, 40, &[]);
        let cap = parse_pcap(&w.into_bytes()).unwrap();
        assert_eq!(cap.records[1].ts, 0.0);
    }
}
