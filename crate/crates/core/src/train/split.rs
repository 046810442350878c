use std::collections::HashMap;

use rand::seq::SliceRandom;

use super::label::ClassLabel;
use crate::seed::{self, Purpose};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions { train: 0.65, val: 0.15, test: 0.20 }
    }
}

/// Sample indices per partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partition samples 65/15/20 without splitting any parent-flow group.
///
/// `samples[i] = (label, group)`. Groups are shuffled within each class, then
/// each group goes to the partition furthest below that class's target sample
/// count (ties: train, val, test), so every class is split in the same
/// proportions. Fails with `EmptyClass` when a class present in `samples` ends
/// up with no training sample.
pub fn split_dataset(samples: &[(ClassLabel, &str)], seed: u64) -> Result<DatasetSplit> {
    split_with(samples, SplitFractions::default(), seed)
}

pub fn split_with(samples: &[(ClassLabel, &str)], fractions: SplitFractions, seed: u64) -> Result<DatasetSplit> {
    let mut group_of: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<(ClassLabel, Vec<usize>)> = Vec::new();
    for (i, &(label, key)) in samples.iter().enumerate() {
        let g = *group_of.entry(key).or_insert_with(|| {
            groups.push((label, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(i);
    }

    let mut by_class: Vec<(ClassLabel, Vec<usize>)> = Vec::new();
    for (g, (label, _)) in groups.iter().enumerate() {
        match by_class.iter_mut().find(|(l, _)| l == label) {
            Some((_, v)) => v.push(g),
            None => by_class.push((*label, vec![g])),
        }
    }
    by_class.sort_by_key(|(l, _)| *l);
    let mut rng = seed::rng_for(seed, Purpose::Split);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (_, gs) in by_class.iter_mut() {
        gs.shuffle(&mut rng);
        let n: usize = gs.iter().map(|&g| groups[g].1.len()).sum();
        let n = n as f64;
        let targets = [fractions.train * n, fractions.val * n, fractions.test * n];
        let mut filled = [0usize; 3];
        for &g in gs.iter() {
            let mut best = 0;
            for p in 1..3 {
                if targets[p] - filled[p] as f64 > targets[best] - filled[best] as f64 {
                    best = p;
                }
            }
            filled[best] += groups[g].1.len();
            parts[best].extend_from_slice(&groups[g].1);
        }
    }
    for p in parts.iter_mut() {
        p.sort_unstable();
    }
    let [train, val, test] = parts;
    for (label, _) in &by_class {
        if !train.iter().any(|&i| samples[i].0 == *label) {
            return Err(Error::EmptyClass(label.to_string()));
        }
    }
    Ok(DatasetSplit { train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lbl(i: usize) -> ClassLabel {
        ClassLabel::new(i).unwrap()
    }

    #[test]
    fn hundred_singletons() {
        let keys: Vec<String> = (0..100).map(|i| format!("f{i}")).collect();
        let samples: Vec<(ClassLabel, &str)> = keys.iter().map(|k| (lbl(3), k.as_str())).collect();
        let s = split_dataset(&samples, 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (65, 15, 20));
        assert_eq!(s, split_dataset(&samples, 1).unwrap());
        assert_ne!(s, split_dataset(&samples, 2).unwrap());
    }

    #[test]
    fn big_group_kept_together() {
        let mut keys: Vec<String> = vec!["big".to_string(); 100];
        keys.extend((0..99).map(|i| format!("f{i}")));
        let samples: Vec<(ClassLabel, &str)> = keys.iter().map(|k| (lbl(0), k.as_str())).collect();
        for seed in 0..10 {
            let s = split_dataset(&samples, seed).unwrap();
            let holders: Vec<usize> = [&s.train, &s.val, &s.test]
                .iter()
                .map(|p| p.iter().filter(|&&i| i < 100).count())
                .collect();
            assert!(holders.contains(&100), "{holders:?}");
            assert_eq!(s.train.len() + s.val.len() + s.test.len(), 199);
        }
    }

    #[test]
    fn mixed_classes_balanced_and_complete() {
        let keys: Vec<String> = (0..400).map(|i| format!("f{i}")).collect();
        let samples: Vec<(ClassLabel, &str)> =
            keys.iter().enumerate().map(|(i, k)| (lbl([3, 6, 9, 12][i % 4]), k.as_str())).collect();
        let s = split_dataset(&samples, 5).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (260, 60, 80));
        for c in [3, 6, 9, 12] {
            let n = s.test.iter().filter(|&&i| samples[i].0.index() == c).count();
            assert!((18..=22).contains(&n), "class {c}: {n}");
        }
    }

    #[test]
    fn empty_class_error() {
        let keys: Vec<String> = (0..10).map(|i| format!("f{i}")).collect();
        let samples: Vec<(ClassLabel, &str)> = keys.iter().map(|k| (lbl(1), k.as_str())).collect();
        let no_train = SplitFractions { train: 0.0, val: 0.5, test: 0.5 };
        assert!(matches!(split_with(&samples, no_train, 0), Err(Error::EmptyClass(_))));
    }
}
