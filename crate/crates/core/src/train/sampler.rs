use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_chacha::ChaCha8Rng;

use super::label::ClassLabel;
use crate::seed;

/// Endless stream of positions into a training list, each drawn with
/// probability proportional to `1 / count(class)`, so every class present
/// is drawn equally often in expectation.
#[derive(Debug, Clone)]
pub struct WeightedSampler {
    dist: WeightedIndex<f64>,
    rng: ChaCha8Rng,
}

impl WeightedSampler {
    /// Returns `None` for an empty training list.
    pub fn new(labels: &[ClassLabel], seed: u64) -> Option<Self> {
        if labels.is_empty() {
            return None;
        }
        let mut counts: HashMap<ClassLabel, usize> = HashMap::new();
        for l in labels {
            *counts.entry(*l).or_default() += 1;
        }
        let weights = labels.iter().map(|l| 1.0 / counts[l] as f64);
        let dist = WeightedIndex::new(weights).ok()?;
        Some(WeightedSampler { dist, rng: seed::rng(seed) })
    }
}

impl Iterator for WeightedSampler {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        Some(self.dist.sample(&mut self.rng))
    }
}
