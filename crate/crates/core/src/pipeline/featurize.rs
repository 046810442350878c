use super::dataset::DatasetEntry;
use super::histogram::build_histogram;
use super::window::{windowize, HistogramConfig};
use crate::ingest::Flow;
use crate::parallel::{self, Parallelism};
use crate::train::ClassLabel;

/// A flow together with its class and a dataset-unique provenance string.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFlow {
    pub flow: Flow,
    pub label: ClassLabel,
    pub source: String,
}

/// Window and histogram every flow. Output order follows `flows`, then window
/// start time, regardless of `par`.
pub fn featurize(flows: &[LabeledFlow], cfg: &HistogramConfig, par: Parallelism) -> Vec<DatasetEntry> {
    parallel::map(flows, par, |_, lf| {
        windowize(&lf.flow, cfg)
            .into_iter()
            .map(|mut w| {
                w.label = Some(lf.label);
                DatasetEntry { hist: build_histogram(&w, cfg), source_flow: lf.source.clone(), t0: w.t0 }
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}
