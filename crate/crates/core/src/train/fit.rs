use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::label::ClassLabel;
use super::sampler::WeightedSampler;
use super::scheduler::{PlateauConfig, PlateauScheduler};
use super::split::DatasetSplit;
use crate::parallel::{self, Parallelism};
use crate::pipeline::FlowHistogram;
use crate::seed::{self, Purpose};
use crate::snn::{batch_gradient, forward_input, loss, predict, InputSequence, InputTransform, SnnModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr0: f64,
    pub adam: AdamConfig,
    pub plateau: PlateauConfig,
    pub lambda_reg: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 128,
            epochs: 30,
            lr0: 3e-2,
            adam: AdamConfig::default(),
            plateau: PlateauConfig::default(),
            lambda_reg: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 || self.lr0.is_nan() || self.lr0 <= 0.0 || self.lambda_reg < 0.0 {
            return Err(Error::Config(format!("invalid training config: {self:?}")));
        }
        Ok(())
    }
}

/// A histogram already converted to the network's input form.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub input: InputSequence,
    pub label: ClassLabel,
}

/// Convert labeled histograms to network inputs. Fails on an unlabeled one.
pub fn prepare_samples(
    hists: &[&FlowHistogram],
    transform: InputTransform,
    par: Parallelism,
) -> Result<Vec<TrainSample>> {
    parallel::map(hists, par, |i, h| {
        let label = h.label.ok_or_else(|| Error::format("dataset", format!("sample {i} is unlabeled")))?;
        Ok(TrainSample { input: InputSequence::from_histogram(h, transform), label })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    /// Learning rate used during this epoch.
    pub lr: f64,
    pub beta_hidden: f64,
    pub beta_readout: f64,
    /// Mean hidden spike count per training sample.
    pub train_spikes: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    /// Parameters from the epoch with the lowest validation loss.
    pub best: SnnModel,
    pub best_epoch: usize,
    pub last: SnnModel,
    pub log: Vec<EpochLog>,
}

/// `(mean loss, accuracy, mean spikes)` over a sample list.
pub(crate) fn score(
    model: &SnnModel,
    samples: &[&TrainSample],
    lambda_reg: f64,
    par: Parallelism,
) -> Result<(f64, f64, f64)> {
    let per = parallel::map(samples, par, |_, s| {
        let tr = forward_input(model, &s.input, None)?;
        let l = loss(&tr, s.label.index(), lambda_reg)?;
        Ok::<_, Error>((l, predict(&tr.logits) == s.label.index(), tr.spike_count()))
    });
    let (mut l, mut c, mut sp) = (0.0, 0usize, 0.0);
    for r in per {
        let (li, ci, si) = r?;
        l += li;
        c += usize::from(ci);
        sp += si;
    }
    let n = samples.len().max(1) as f64;
    Ok((l / n, c as f64 / n, sp / n))
}

/// Train with Adam on batches drawn by the class-balanced sampler.
///
/// Each epoch draws `ceil(|train| / batch_size)` full batches. The batch
/// objective is the mean cross entropy plus `lambda_reg` times the mean hidden
/// spike count. The plateau scheduler watches the validation loss, and the
/// parameters with the lowest validation loss are kept.
pub fn fit(
    model: SnnModel,
    samples: &[TrainSample],
    split: &DatasetSplit,
    cfg: &TrainConfig,
    par: Parallelism,
) -> Result<FitOutcome> {
    cfg.validate()?;
    if split.val.is_empty() {
        return Err(Error::Config("validation set is empty".into()));
    }
    let train: Vec<&TrainSample> = split.train.iter().map(|&i| &samples[i]).collect();
    let val: Vec<&TrainSample> = split.val.iter().map(|&i| &samples[i]).collect();
    let labels: Vec<ClassLabel> = train.iter().map(|s| s.label).collect();
    let mut sampler = WeightedSampler::new(&labels, seed::derive(cfg.seed, Purpose::Sampler))
        .ok_or_else(|| Error::Config("training set is empty".into()))?;

    let mut model = model;
    let mut adam = AdamState::new(&model);
    let mut sched = PlateauScheduler::new(cfg.lr0, cfg.plateau);
    let batches = train.len().div_ceil(cfg.batch_size);
    let mut best = (f64::INFINITY, model.clone(), 0usize);
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let lr = sched.lr();
        let (mut train_loss, mut spikes) = (0.0, 0.0);
        for _ in 0..batches {
            let batch: Vec<(&InputSequence, usize)> = sampler
                .by_ref()
                .take(cfg.batch_size)
                .map(|i| (&train[i].input, train[i].label.index()))
                .collect();
            let (grads, stats) = batch_gradient(&model, &batch, cfg.lambda_reg, par)?;
            adam_step(&mut model, &grads, &mut adam, &cfg.adam, lr);
            train_loss += stats.mean_loss;
            spikes += stats.mean_spikes;
        }
        let (val_loss, val_acc, _) = score(&model, &val, cfg.lambda_reg, par)?;
        sched.step(val_loss);
        log.push(EpochLog {
            epoch,
            train_loss: train_loss / batches as f64,
            val_loss,
            val_acc,
            lr,
            beta_hidden: model.hidden.beta(),
            beta_readout: model.readout.beta(),
            train_spikes: spikes / batches as f64,
        });
        if val_loss < best.0 {
            best = (val_loss, model.clone(), epoch);
        }
    }
    Ok(FitOutcome { best: best.1, best_epoch: best.2, last: model, log })
}

/// `epoch,train_loss,val_loss,val_acc,lr,beta_hidden,beta_readout`, one row per epoch.
pub fn epoch_log_csv(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch,train_loss,val_loss,val_acc,lr,beta_hidden,beta_readout\n");
    for e in log {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:e},{:.6},{:.6}",
            e.epoch, e.train_loss, e.val_loss, e.val_acc, e.lr, e.beta_hidden, e.beta_readout
        )
        .unwrap();
    }
    out
}
