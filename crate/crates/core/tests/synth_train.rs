use snnflow::pipeline::{featurize, read_dataset, write_dataset, HistogramConfig};
use snnflow::snn::{decode_checkpoint, encode_checkpoint, forward, predict, Architecture, InitConfig, SnnModel};
use snnflow::synth::{generate_flow, standard_suite, temporal_pair, StandardProfiles, SuiteConfig};
use snnflow::train::{fit, prepare_samples, split_dataset, ClassLabel, TrainConfig};
use snnflow::{ingest::Direction, Parallelism};

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn temporal_pair_has_identical_size_marginals() {
    let p = StandardProfiles::new(60.0);
    let sizes = |profile, dir: Direction| -> Vec<f64> {
        (0..)
            .flat_map(|s| generate_flow(profile, s).packets)
            .filter(|pk| pk.dir == dir)
            .take(10_000)
            .map(|pk| pk.wire_len as f64)
            .collect()
    };
    for dir in [Direction::Forward, Direction::Backward] {
        let d = ks(sizes(&p.chat, dir), sizes(&p.browsing, dir));
        assert!(d < 0.05, "{dir:?}: KS {d}");
    }
    assert!((p.chat.expected_packets() - p.browsing.expected_packets()).abs() < 1e-9);
    assert_eq!(temporal_pair(), [p.labeled()[2].0, p.labeled()[3].0]);
}

#[test]
fn suite_class_counts_exact() {
    let flows = standard_suite(&SuiteConfig { flows_per_class: 25, ..Default::default() });
    for (label, _) in StandardProfiles::new(45.0).labeled() {
        assert_eq!(flows.iter().filter(|f| f.label == label).count(), 25);
    }
    let mut ids: Vec<u64> = flows.iter().map(|f| f.flow.id).collect();
    ids.dedup();
    assert_eq!(ids.len(), 100);
}

#[test]
fn training_is_deterministic_and_thread_independent() {
    let flows = standard_suite(&SuiteConfig { flows_per_class: 12, seed: 9, ..Default::default() });
    let entries = featurize(&flows, &HistogramConfig::default(), Parallelism::Rayon);
    let keys: Vec<(ClassLabel, &str)> = entries.iter().map(|e| (e.hist.label.unwrap(), e.source_flow.as_str())).collect();
    let split = split_dataset(&keys, 9).unwrap();
    let hists: Vec<_> = entries.iter().map(|e| &e.hist).collect();
    let init = InitConfig::default();
    let samples = prepare_samples(&hists, init.input_transform, Parallelism::Rayon).unwrap();
    let cfg = TrainConfig { epochs: 3, batch_size: 32, seed: 9, ..Default::default() };
    let model = SnnModel::init(Architecture::default(), &init, 9).unwrap();
    let a = fit(model.clone(), &samples, &split, &cfg, Parallelism::Sequential).unwrap();
    let b = fit(model, &samples, &split, &cfg, Parallelism::Rayon).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.log, b.log);
    assert!(a.log.last().unwrap().train_loss < a.log[0].train_loss);

    // checkpoint and dataset files reproduce the same predictions
    let restored = decode_checkpoint(&encode_checkpoint(&a.best)).unwrap();
    assert_eq!(restored, a.best);
    let dir = std::env::temp_dir().join(format!("snnflow-ds-{}", std::process::id()));
    write_dataset(&dir, &entries).unwrap();
    let back = read_dataset(&dir).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(back.len(), entries.len());
    for (x, y) in back.iter().zip(&entries).step_by(7) {
        assert_eq!(x.hist, y.hist);
        assert_eq!(
            predict(&forward(&restored, &x.hist).unwrap().logits),
            predict(&forward(&a.best, &y.hist).unwrap().logits)
        );
    }
}
