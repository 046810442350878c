//! Train on the built-in synthetic suite and print accuracy under each
//! ablation. Knobs come from environment variables:
//! `FLOWS` (per class), `EPOCHS`, `LR`, `GAIN`, `SEED`, `LOG1P=1`.

use std::time::Instant;

use snnflow::pipeline::{featurize, HistogramConfig};
use snnflow::snn::{Architecture, InitConfig, InputTransform, SnnModel};
use snnflow::synth::{standard_suite, temporal_pair, SuiteConfig};
use snnflow::train::{evaluate, fit, prepare_samples, split_dataset, Ablation, Scope, TrainConfig};
use snnflow::{train, Parallelism};

fn env<T: std::str::FromStr>(name: &str, default: T) -> T {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() -> snnflow::Result<()> {
    let seed: u64 = env("SEED", 1);
    let start = Instant::now();
    let flows = standard_suite(&SuiteConfig { flows_per_class: env("FLOWS", 200), seed, ..Default::default() });
    let entries = featurize(&flows, &HistogramConfig::default(), Parallelism::available());
    let keys: Vec<_> = entries.iter().map(|e| (e.hist.label.unwrap(), e.source_flow.as_str())).collect();
    let split = split_dataset(&keys, seed)?;
    let init = InitConfig {
        hidden_gain: env("GAIN", InitConfig::default().hidden_gain),
        input_transform: if env("LOG1P", 0) == 1 { InputTransform::Log1p } else { InputTransform::Raw },
        ..Default::default()
    };
    let hists: Vec<_> = entries.iter().map(|e| &e.hist).collect();
    let samples = prepare_samples(&hists, init.input_transform, Parallelism::available())?;
    println!(
        "{} windows ({} train / {} val / {} test) in {:.1?}",
        entries.len(),
        split.train.len(),
        split.val.len(),
        split.test.len(),
        start.elapsed()
    );
    let cfg = TrainConfig { epochs: env("EPOCHS", 30), lr0: env("LR", TrainConfig::default().lr0), seed, ..Default::default() };
    let model = SnnModel::init(Architecture::default(), &init, seed)?;
    let out = fit(model, &samples, &split, &cfg, Parallelism::available())?;
    for e in &out.log {
        println!(
            "epoch {:2} train {:.4} val {:.4} acc {:.4} lr {:.1e} beta {:.3}/{:.3} spikes {:.1}",
            e.epoch, e.train_loss, e.val_loss, e.val_acc, e.lr, e.beta_hidden, e.beta_readout, e.train_spikes
        );
    }
    println!("trained in {:.1?} (best epoch {})", start.elapsed(), out.best_epoch);
    let test: Vec<_> = split.test.iter().map(|&i| &entries[i].hist).collect();
    let pair: Vec<usize> = temporal_pair().iter().map(|l| l.index()).collect();
    for ab in [Ablation::None, Ablation::RowShuffle(seed), Ablation::ColumnShuffle(seed), Ablation::BetaZero] {
        let r = evaluate(&out.best, &test, ab, Parallelism::available())?;
        let p = train::metrics_from_confusion(&r.confusion, Scope::Subset(pair.clone()));
        println!("{ab:?}: overall {:.4} pair {:.4}", r.overall.accuracy.unwrap(), p.accuracy.unwrap_or(f64::NAN));
    }
    Ok(())
}
