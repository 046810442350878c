//! Confusion matrices and the precision / recall / accuracy derived from them.
//!
//! Convention: `counts[pred][truth]`, rows are predicted labels and columns
//! true labels. A metric whose denominator is zero is `None` ("n/a"), never
//! 0 or 1.

use serde::Serialize;

use super::label::{ClassLabel, Encryption, NUM_CLASSES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n: usize) -> Self {
        ConfusionMatrix { n, counts: vec![0; n * n] }
    }

    /// From `(predicted, truth)` pairs. Panics on an out-of-range class.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut cm = Self::new(n);
        for (p, t) in pairs {
            cm.record(p, t);
        }
        cm
    }

    /// From a `[pred][truth]` row-major table.
    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "confusion matrix must be square");
        ConfusionMatrix { n, counts: rows.concat() }
    }

    pub fn record(&mut self, pred: usize, truth: usize) {
        assert!(pred < self.n && truth < self.n, "class out of range");
        self.counts[pred * self.n + truth] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.n, other.n);
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
    }

    pub fn classes(&self) -> usize {
        self.n
    }

    pub fn get(&self, pred: usize, truth: usize) -> u64 {
        self.counts[pred * self.n + truth]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Per-class truth counts (column sums).
    pub fn truth_counts(&self) -> Vec<u64> {
        (0..self.n).map(|t| (0..self.n).map(|p| self.get(p, t)).sum()).collect()
    }

    /// Per-class prediction counts (row sums).
    pub fn predicted_counts(&self) -> Vec<u64> {
        (0..self.n).map(|p| (0..self.n).map(|t| self.get(p, t)).sum()).collect()
    }

    /// Sub-matrix over `classes` (in the given order).
    pub fn restrict(&self, classes: &[usize]) -> ConfusionMatrix {
        let rows: Vec<Vec<u64>> = classes
            .iter()
            .map(|&p| classes.iter().map(|&t| self.get(p, t)).collect())
            .collect();
        ConfusionMatrix::from_rows(&rows)
    }

    /// Merge classes through `map` (old class → new class).
    pub fn collapse(&self, n_new: usize, map: impl Fn(usize) -> usize) -> ConfusionMatrix {
        let mut out = ConfusionMatrix::new(n_new);
        for p in 0..self.n {
            for t in 0..self.n {
                out.counts[map(p) * n_new + map(t)] += self.get(p, t);
            }
        }
        out
    }

    pub fn one_vs_all(&self, class: usize) -> BinaryCounts {
        let tp = self.get(class, class);
        let predicted: u64 = (0..self.n).map(|t| self.get(class, t)).sum();
        let truth: u64 = (0..self.n).map(|p| self.get(p, class)).sum();
        let fp = predicted - tp;
        let fn_ = truth - tp;
        BinaryCounts { tp, fp, fn_, tn: self.total() - tp - fp - fn_ }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl BinaryCounts {
    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn_)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    /// Class index in the original (unrestricted) matrix.
    pub class: usize,
    pub counts: BinaryCounts,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scope {
    /// Every class, one-vs-all each.
    All,
    /// A single class against the rest.
    OneVsAll(usize),
    /// Only the labels of one encryption (14-class matrices), one-vs-all
    /// within that sub-matrix.
    Encryption(Encryption),
    /// An arbitrary subset of classes, one-vs-all within.
    Subset(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScopeMetrics {
    pub classes: Vec<ClassMetrics>,
    /// Multi-class accuracy of the (restricted) matrix: trace / total.
    pub accuracy: Option<f64>,
    /// Means over classes with non-zero truth support, skipping undefined values.
    pub macro_precision: Option<f64>,
    pub macro_recall: Option<f64>,
    pub macro_accuracy: Option<f64>,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn metrics_from_confusion(cm: &ConfusionMatrix, scope: Scope) -> ScopeMetrics {
    // (matrix to score, original class ids, index of each class within the matrix)
    let (sub, members, local): (ConfusionMatrix, Vec<usize>, Vec<usize>) = match scope {
        Scope::All => (cm.clone(), (0..cm.classes()).collect(), (0..cm.classes()).collect()),
        Scope::OneVsAll(c) => (cm.clone(), vec![c], vec![c]),
        Scope::Encryption(enc) => {
            assert_eq!(cm.classes(), NUM_CLASSES, "encryption scope needs the 14-label matrix");
            let members: Vec<usize> =
                ClassLabel::all().filter(|l| l.encryption() == enc).map(|l| l.index()).collect();
            let local = (0..members.len()).collect();
            (cm.restrict(&members), members, local)
        }
        Scope::Subset(members) => {
            let local = (0..members.len()).collect();
            (cm.restrict(&members), members, local)
        }
    };
    let classes: Vec<ClassMetrics> = members
        .iter()
        .zip(&local)
        .map(|(&class, &pos)| {
            let counts = sub.one_vs_all(pos);
            ClassMetrics {
                class,
                counts,
                precision: counts.precision(),
                recall: counts.recall(),
                accuracy: counts.accuracy(),
            }
        })
        .collect();
    let supported = || classes.iter().filter(|c| c.counts.tp + c.counts.fn_ > 0);
    ScopeMetrics {
        accuracy: ratio(sub.trace(), sub.total()),
        macro_precision: mean_defined(supported().map(|c| c.precision)),
        macro_recall: mean_defined(supported().map(|c| c.recall)),
        macro_accuracy: mean_defined(supported().map(|c| c.accuracy)),
        classes,
    }
}
