use super::label::{Encryption, NUM_CLASSES};
use super::metrics::{metrics_from_confusion, ConfusionMatrix, Scope, ScopeMetrics};
use crate::parallel::{self, Parallelism};
use crate::pipeline::{shuffle_columns_shared, shuffle_rows_independent, FlowHistogram};
use crate::seed;
use crate::snn::{forward_input, predict, Betas, InputSequence, SnnModel};
use crate::{Error, Result};

/// Inference-time manipulation applied before classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    None,
    /// Independent time permutation per size row; sample `i` uses seed `child(seed, i)`.
    RowShuffle(u64),
    /// One time permutation per histogram shared by all rows.
    ColumnShuffle(u64),
    /// Both leaks forced to zero; parameters untouched.
    BetaZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    pub predictions: Vec<usize>,
    pub overall: ScopeMetrics,
    pub per_encryption: Vec<(Encryption, ScopeMetrics)>,
}

/// Predicted class of every histogram under `ablation`, in input order.
pub fn predict_all(
    model: &SnnModel,
    hists: &[&FlowHistogram],
    ablation: Ablation,
    par: Parallelism,
) -> Result<Vec<usize>> {
    parallel::map(hists, par, |i, h| {
        let shuffled;
        let h = match ablation {
            Ablation::RowShuffle(s) => {
                shuffled = shuffle_rows_independent(h, seed::child(s, i as u64));
                &shuffled
            }
            Ablation::ColumnShuffle(s) => {
                shuffled = shuffle_columns_shared(h, seed::child(s, i as u64));
                &shuffled
            }
            Ablation::None | Ablation::BetaZero => *h,
        };
        let betas = (ablation == Ablation::BetaZero).then_some(Betas::ZERO);
        let input = InputSequence::from_histogram(h, model.input_transform);
        Ok(predict(&forward_input(model, &input, betas)?.logits))
    })
    .into_iter()
    .collect()
}

/// Classify a labeled test set and build its confusion matrix
/// (rows = predicted, columns = truth).
pub fn evaluate(
    model: &SnnModel,
    test: &[&FlowHistogram],
    ablation: Ablation,
    par: Parallelism,
) -> Result<MetricsReport> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let truth: Vec<usize> = test
        .iter()
        .enumerate()
        .map(|(i, h)| h.label.map(|l| l.index()).ok_or_else(|| Error::format("dataset", format!("test sample {i} is unlabeled"))))
        .collect::<Result<_>>()?;
    let classes = model.readout.weights.rows();
    let predictions = predict_all(model, test, ablation, par)?;
    let confusion = ConfusionMatrix::from_pairs(classes, predictions.iter().copied().zip(truth));
    let overall = metrics_from_confusion(&confusion, Scope::All);
    let per_encryption = if classes == NUM_CLASSES {
        Encryption::ALL
            .iter()
            .map(|&e| (e, metrics_from_confusion(&confusion, Scope::Encryption(e))))
            .collect()
    } else {
        Vec::new()
    };
    Ok(MetricsReport { confusion, predictions, overall, per_encryption })
}
