//! Dataset splitting, balanced sampling, optimization, evaluation and reporting.

mod adam;
mod evaluate;
mod fit;
mod label;
mod manifest;
mod metrics;
mod report;
mod sampler;
mod scheduler;
mod split;

pub use adam::{adam_step, AdamConfig, AdamState, BETA_RAW_LIMIT};
pub use evaluate::{evaluate, predict_all, Ablation, MetricsReport};
pub use fit::{epoch_log_csv, fit, prepare_samples, EpochLog, FitOutcome, TrainConfig, TrainSample};
pub use label::{ClassLabel, Encryption, TrafficClass, NUM_CLASSES};
pub use manifest::{read_manifest, ManifestEntry, MANIFEST_HEADER};
pub use metrics::{
    metrics_from_confusion, BinaryCounts, ClassMetrics, ConfusionMatrix, Scope, ScopeMetrics,
};
pub use report::{fmt_metric, report, Report, Table};
pub use sampler::WeightedSampler;
pub use scheduler::{PlateauConfig, PlateauScheduler};
pub use split::{split_dataset, DatasetSplit, SplitFractions};
