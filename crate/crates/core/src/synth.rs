//! Seeded synthetic flows with controllable size and timing structure.
//!
//! Arrivals are Poisson. A burst period thins them with an on/off square
//! wave (rate doubled while on, so the mean rate is unchanged). With
//! probability `synchrony` each forward packet triggers a backward packet at
//! the same instant plus uniform jitter.

use std::net::Ipv4Addr;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::ingest::{Direction, Endpoint, Flow, FlowKey, PacketRecord, Protocol};
use crate::pipeline::LabeledFlow;
use crate::seed::{self, Purpose};
use crate::train::{ClassLabel, Encryption, TrafficClass};
use crate::{Error, Result};

/// Categorical mixture of uniform byte ranges `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeDist {
    ranges: Vec<(u16, u16, f64)>,
    total: f64,
}

impl SizeDist {
    pub fn new(ranges: Vec<(u16, u16, f64)>) -> Result<Self> {
        if ranges.is_empty() || ranges.iter().any(|&(lo, hi, w)| lo > hi || w.is_nan() || w < 0.0) {
            return Err(Error::Config(format!("bad size ranges {ranges:?}")));
        }
        let total: f64 = ranges.iter().map(|r| r.2).sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Config("size weights sum to zero".into()));
        }
        Ok(SizeDist { ranges, total })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> u16 {
        let mut u = rng.random_range(0.0..self.total);
        for &(lo, hi, w) in &self.ranges {
            if u < w {
                return rng.random_range(lo..=hi);
            }
            u -= w;
        }
        let &(lo, hi, _) = self.ranges.last().unwrap();
        rng.random_range(lo..=hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassProfile {
    pub name: String,
    pub fwd_sizes: Arc<SizeDist>,
    pub bwd_sizes: Arc<SizeDist>,
    /// Mean packets per second.
    pub rate_fwd: f64,
    pub rate_bwd: f64,
    pub burst_period: Option<f64>,
    /// Probability that a forward packet triggers a backward reply.
    pub synchrony: f64,
    /// Reply offset is uniform in `[-jitter_s, jitter_s]`.
    pub jitter_s: f64,
    pub duration: f64,
}

impl ClassProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.synchrony)
            && self.rate_fwd >= 0.0
            && self.rate_bwd >= 0.0
            && self.jitter_s >= 0.0
            && self.duration > 0.0
            && self.burst_period.is_none_or(|p| p > 0.0);
        if !ok {
            return Err(Error::Config(format!("invalid profile {}", self.name)));
        }
        Ok(())
    }

    /// Mean packets per flow.
    pub fn expected_packets(&self) -> f64 {
        (self.rate_fwd * (1.0 + self.synchrony) + self.rate_bwd) * self.duration
    }
}

fn arrivals(rate: f64, duration: f64, burst: Option<(f64, f64)>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if rate <= 0.0 {
        return Vec::new();
    }
    let base = if burst.is_some() { 2.0 * rate } else { rate };
    let exp = Exp::new(base).unwrap();
    let mut out = Vec::new();
    let mut t = exp.sample(rng);
    while t < duration {
        let on = burst.is_none_or(|(period, phase)| ((t + phase) % period) < period / 2.0);
        if on {
            out.push(t);
        }
        t += exp.sample(rng);
    }
    out
}

/// One flow from `profile`, deterministic in `seed`. Flow id 0.
pub fn generate_flow(profile: &ClassProfile, seed: u64) -> Flow {
    let mut rng = seed::rng(seed);
    let burst = profile.burst_period.map(|p| (p, rng.random_range(0.0..p)));
    let d = profile.duration;
    let mut packets = Vec::new();
    for t in arrivals(profile.rate_fwd, d, burst, &mut rng) {
        packets.push(PacketRecord { ts: t, wire_len: profile.fwd_sizes.sample(&mut rng), dir: Direction::Forward });
        if profile.synchrony > 0.0 && rng.random_bool(profile.synchrony) {
            let j = if profile.jitter_s > 0.0 {
                rng.random_range(-profile.jitter_s..=profile.jitter_s)
            } else {
                0.0
            };
            let ts = (t + j).clamp(0.0, d.next_down());
            packets.push(PacketRecord { ts, wire_len: profile.bwd_sizes.sample(&mut rng), dir: Direction::Backward });
        }
    }
    for t in arrivals(profile.rate_bwd, d, burst, &mut rng) {
        packets.push(PacketRecord { ts: t, wire_len: profile.bwd_sizes.sample(&mut rng), dir: Direction::Backward });
    }
    Flow::new(0, Some(synthetic_key(0)), packets)
}

/// A TCP key unique to `id` (for ids below 2²⁴): client `10.a.b.c:40000+`,
/// server `192.168.0.1:443`.
pub fn synthetic_key(id: u64) -> FlowKey {
    let [_, _, _, _, _, a, b, c] = id.to_be_bytes();
    FlowKey::new(
        Endpoint::new(Ipv4Addr::new(10, a, b, c), 40000 + (id % 20000) as u16),
        Endpoint::new(Ipv4Addr::new(192, 168, 0, 1), 443),
        Protocol::Tcp,
    )
}

/// The four built-in classes and their labels.
pub struct StandardProfiles {
    pub voip: ClassProfile,
    pub file_transfer: ClassProfile,
    pub chat: ClassProfile,
    pub browsing: ClassProfile,
}

pub fn label_of(class: TrafficClass) -> ClassLabel {
    ClassLabel::from_parts(class, Encryption::Unencrypted).unwrap()
}

/// The two classes that share every size distribution and rate and differ
/// only in whether replies land in the same time bin as their request.
pub fn temporal_pair() -> [ClassLabel; 2] {
    [label_of(TrafficClass::Chat), label_of(TrafficClass::Browsing)]
}

impl StandardProfiles {
    pub fn new(duration: f64) -> Self {
        let small = Arc::new(SizeDist::new(vec![(60, 120, 0.5), (121, 220, 0.5)]).unwrap());
        let bulk = Arc::new(SizeDist::new(vec![(1200, 1500, 0.9), (500, 1199, 0.1)]).unwrap());
        let acks = Arc::new(SizeDist::new(vec![(40, 80, 1.0)]).unwrap());
        let mixed = Arc::new(SizeDist::new(vec![(60, 300, 0.5), (301, 800, 0.3), (801, 1500, 0.2)]).unwrap());
        StandardProfiles {
            voip: ClassProfile {
                name: "voip-like".into(),
                fwd_sizes: small.clone(),
                bwd_sizes: small,
                rate_fwd: 6.0,
                rate_bwd: 0.0,
                burst_period: None,
                synchrony: 0.9,
                jitter_s: 0.08,
                duration,
            },
            file_transfer: ClassProfile {
                name: "filetransfer-like".into(),
                fwd_sizes: bulk,
                bwd_sizes: acks,
                rate_fwd: 8.0,
                rate_bwd: 2.0,
                burst_period: None,
                synchrony: 0.0,
                jitter_s: 0.0,
                duration,
            },
            chat: ClassProfile {
                name: "chat-like".into(),
                fwd_sizes: mixed.clone(),
                bwd_sizes: mixed.clone(),
                rate_fwd: 0.75,
                rate_bwd: 0.0,
                burst_period: Some(8.0),
                synchrony: 0.9,
                jitter_s: 0.08,
                duration,
            },
            browsing: ClassProfile {
                name: "browsing-like".into(),
                fwd_sizes: mixed.clone(),
                bwd_sizes: mixed,
                rate_fwd: 0.75,
                rate_bwd: 0.675,
                burst_period: None,
                synchrony: 0.0,
                jitter_s: 0.0,
                duration,
            },
        }
    }

    pub fn labeled(&self) -> [(ClassLabel, &ClassProfile); 4] {
        [
            (label_of(TrafficClass::VoIP), &self.voip),
            (label_of(TrafficClass::FileTransfer), &self.file_transfer),
            (label_of(TrafficClass::Chat), &self.chat),
            (label_of(TrafficClass::Browsing), &self.browsing),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub flows_per_class: usize,
    pub duration: f64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { flows_per_class: 200, duration: 45.0, seed: 0 }
    }
}

/// Labeled flows of the four standard classes, class-major order, flow ids
/// unique across the suite. Empty flows are dropped.
pub fn standard_suite(cfg: &SuiteConfig) -> Vec<LabeledFlow> {
    let profiles = StandardProfiles::new(cfg.duration);
    let root = seed::derive(cfg.seed, Purpose::Synth);
    let mut out = Vec::with_capacity(4 * cfg.flows_per_class);
    for (c, (label, profile)) in profiles.labeled().into_iter().enumerate() {
        for i in 0..cfg.flows_per_class {
            let id = (c * cfg.flows_per_class + i) as u64;
            let mut flow = generate_flow(profile, seed::child(root, id));
            if flow.is_empty() {
                continue;
            }
            flow.id = id;
            flow.key = Some(synthetic_key(id));
            out.push(LabeledFlow { flow, label, source: format!("synth#{id}") });
        }
    }
    out
}
