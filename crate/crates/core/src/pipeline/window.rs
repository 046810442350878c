use serde::{Deserialize, Serialize};

use crate::ingest::{Direction, Flow};
use crate::train::ClassLabel;
use crate::{Error, Result};

/// Binning geometry. The defaults give 200 ms time columns and 10-byte size
/// rows, 150 per direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub time_bins: usize,
    pub size_bins_per_dir: usize,
    pub max_size: f64,
    pub window_s: f64,
    pub stride_s: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            time_bins: 300,
            size_bins_per_dir: 150,
            max_size: 1500.0,
            window_s: 60.0,
            stride_s: 15.0,
        }
    }
}

impl HistogramConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.time_bins > 0
            && self.size_bins_per_dir > 0
            && self.max_size > 0.0
            && self.window_s > 0.0
            && self.stride_s > 0.0;
        if !positive || !self.window_s.is_finite() || !self.stride_s.is_finite() {
            return Err(Error::Config(format!("histogram config must be positive: {self:?}")));
        }
        if self.time_bins > u16::MAX as usize || 2 * self.size_bins_per_dir > u16::MAX as usize {
            return Err(Error::Config("histogram dimensions exceed u16".into()));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        2 * self.size_bins_per_dir
    }

    pub fn bin_seconds(&self) -> f64 {
        self.window_s / self.time_bins as f64
    }

    pub fn bin_bytes(&self) -> f64 {
        self.max_size / self.size_bins_per_dir as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPacket {
    /// Seconds since the window start, in `[0, window_s)`.
    pub rel_ts: f64,
    pub wire_len: u16,
    pub dir: Direction,
}

/// One fixed-length slice of a flow; never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowWindow {
    pub source_flow: u64,
    pub t0: f64,
    pub duration: f64,
    pub packets: Vec<WindowPacket>,
    pub label: Option<ClassLabel>,
}

/// Number of candidate window starts `k·stride` with `k·stride <= last_ts`.
pub fn candidate_window_count(last_ts: f64, stride_s: f64) -> usize {
    (last_ts / stride_s).floor() as usize + 1
}

/// Cut a flow into overlapping windows starting every `stride_s`. A packet at
/// `t` belongs to each window with `0 <= t - t0 < window_s`. Empty windows are
/// dropped.
pub fn windowize(flow: &Flow, cfg: &HistogramConfig) -> Vec<FlowWindow> {
    let Some(last) = flow.last_ts() else {
        return Vec::new();
    };
    let n = candidate_window_count(last, cfg.stride_s);
    let mut out = Vec::new();
    let mut lo = 0usize;
    for k in 0..n {
        let t0 = k as f64 * cfg.stride_s;
        while lo < flow.packets.len() && flow.packets[lo].ts < t0 {
            lo += 1;
        }
        let packets: Vec<WindowPacket> = flow.packets[lo..]
            .iter()
            .map(|p| (p, p.ts - t0))
            .take_while(|(_, rel)| *rel < cfg.window_s)
            .map(|(p, rel_ts)| WindowPacket { rel_ts, wire_len: p.wire_len, dir: p.dir })
            .collect();
        if !packets.is_empty() {
            out.push(FlowWindow {
                source_flow: flow.id,
                t0,
                duration: cfg.window_s,
                packets,
                label: None,
            });
        }
    }
    out
}
