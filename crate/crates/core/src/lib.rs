//! Encrypted-traffic classification with a one-hidden-layer spiking network.
//!
//! The crate covers the whole pipeline:
//!
//! * [`ingest`]: classic pcap parsing, 5-tuple flow assembly, packet CSV logs.
//! * [`pipeline`]: 60 s sliding windows, 300×300 time×size histograms, temporal shuffles.
//! * [`snn`]: leaky integrate-and-fire dynamics, readout layer, surrogate-gradient BPTT.
//! * [`train`]: labels, splitting, balanced sampling, Adam, plateau scheduling, metrics, reports.
//! * [`synth`]: seeded synthetic flows with controllable size and timing structure.

pub mod error;
pub mod ingest;
pub mod parallel;
pub mod pipeline;
pub mod seed;
pub mod snn;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use parallel::Parallelism;
