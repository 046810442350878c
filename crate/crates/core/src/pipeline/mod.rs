//! Flows → 60 s windows → time×size count histograms, plus the two temporal shuffles.

mod dataset;
mod featurize;
mod histogram;
mod shuffle;
mod window;

pub use dataset::{
    decode_fh01, encode_fh01, read_dataset, write_dataset, DatasetEntry, FH01_MAGIC, UNLABELED,
};
pub use featurize::{featurize, LabeledFlow};
pub use histogram::{build_histogram, Cell, FlowHistogram};
pub use shuffle::{
    apply_column_permutation, column_permutation, invert_permutation, shuffle_columns_shared,
    shuffle_rows_independent,
};
pub use window::{candidate_window_count, windowize, FlowWindow, HistogramConfig, WindowPacket};
