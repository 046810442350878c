use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use snnflow::ingest::{ingest_pcap, read_packet_csv, write_packet_csv, Flow};
use snnflow::pipeline::{featurize, read_dataset, write_dataset, DatasetEntry, LabeledFlow};
use snnflow::seed::{self, Purpose};
use snnflow::snn::{decode_checkpoint, encode_checkpoint, gradcheck, SnnModel};
use snnflow::synth::standard_suite;
use snnflow::train::{
    epoch_log_csv, evaluate, fit, prepare_samples, read_manifest, report, split_dataset, Ablation, ClassLabel,
    DatasetSplit,
};
use snnflow::Parallelism;

use crate::config::RunConfig;

pub const PACKETS_FILE: &str = "packets.csv";
pub const FLOWS_FILE: &str = "flows.csv";
pub const FLOWS_HEADER: &str = "flow_id,label,source";
pub const CHECKPOINT_FILE: &str = "model.snn";

fn par() -> Parallelism {
    Parallelism::available()
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Write `packets.csv` and the `flows.csv` label index.
fn write_flows(dir: &Path, flows: &[LabeledFlow]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let plain: Vec<Flow> = flows.iter().map(|f| f.flow.clone()).collect();
    write(&dir.join(PACKETS_FILE), write_packet_csv(&plain))?;
    let mut index = format!("{FLOWS_HEADER}\n");
    for f in flows {
        writeln!(index, "{},{},{}", f.flow.id, f.label.index(), f.source).unwrap();
    }
    write(&dir.join(FLOWS_FILE), index)
}

fn read_flows(dir: &Path) -> Result<Vec<LabeledFlow>> {
    let packets = read_packet_csv(&read_text(&dir.join(PACKETS_FILE))?).context("parsing packets.csv")?;
    let text = read_text(&dir.join(FLOWS_FILE))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(FLOWS_HEADER) {
        bail!("flows.csv: expected header `{FLOWS_HEADER}`");
    }
    let mut labels = std::collections::HashMap::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        let parsed = match f.as_slice() {
            [id, label, source] => id.parse::<u64>().ok().zip(label.parse::<usize>().ok()).map(|p| (p, *source)),
            _ => None,
        };
        let Some(((id, label), source)) = parsed else {
            bail!("flows.csv line {}: expected flow_id,label,source", i + 2);
        };
        labels.insert(id, (ClassLabel::new(label)?, source.to_string()));
    }
    packets
        .into_iter()
        .map(|flow| {
            let (label, source) = labels.get(&flow.id).cloned().with_context(|| format!("flow {} has no label", flow.id))?;
            Ok(LabeledFlow { flow, label, source })
        })
        .collect()
}

pub fn ingest(cfg: &RunConfig) -> Result<()> {
    let manifest_path = cfg.manifest.as_deref().context("a manifest is required (--manifest)")?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let manifest = read_manifest(&read_text(manifest_path)?).context("parsing manifest")?;
    let mut flows = Vec::new();
    let mut next_id = 0u64;
    for entry in &manifest {
        if entry.capture_file.contains(',') {
            bail!("capture file name `{}` contains a comma", entry.capture_file);
        }
        let path = base.join(&entry.capture_file);
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            read_packet_csv(std::str::from_utf8(&bytes).context("packet CSV is not UTF-8")?)
        } else {
            ingest_pcap(&bytes).map(|(f, stats)| {
                eprintln!(
                    "{}: {} records, {} flow packets, {} non-flow ({} malformed), {} flows",
                    entry.capture_file,
                    stats.records,
                    stats.flow_packets,
                    stats.non_flow,
                    stats.malformed,
                    f.len()
                );
                f
            })
        }
        .with_context(|| format!("ingesting {}", path.display()))?;
        for mut flow in parsed {
            let source = format!("{}#{}", entry.capture_file, flow.id);
            flow.id = next_id;
            next_id += 1;
            flows.push(LabeledFlow { flow, label: entry.label, source });
        }
    }
    write_flows(cfg.out_dir()?, &flows)
}

pub fn synth(cfg: &RunConfig) -> Result<()> {
    let flows = standard_suite(&cfg.suite);
    eprintln!("generated {} flows", flows.len());
    write_flows(cfg.out_dir()?, &flows)
}

pub fn featurize_cmd(cfg: &RunConfig, input: &Path) -> Result<()> {
    let flows = read_flows(input)?;
    let entries = featurize(&flows, &cfg.histogram, par());
    if entries.is_empty() {
        bail!("no windows produced from {} flows", flows.len());
    }
    eprintln!("{} flows -> {} histograms", flows.len(), entries.len());
    write_dataset(cfg.out_dir()?, &entries)?;
    Ok(())
}

fn split_of(entries: &[DatasetEntry], seed: u64) -> Result<DatasetSplit> {
    let keys: Vec<(ClassLabel, &str)> = entries
        .iter()
        .map(|e| Ok((e.hist.label.context("dataset entry without label")?, e.source_flow.as_str())))
        .collect::<Result<_>>()?;
    Ok(split_dataset(&keys, seed)?)
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let entries = read_dataset(cfg.dataset_dir()?)?;
    let split = split_of(&entries, cfg.seed)?;
    let hists: Vec<_> = entries.iter().map(|e| &e.hist).collect();
    let samples = prepare_samples(&hists, cfg.init.input_transform, par())?;
    let model = SnnModel::init(cfg.architecture(), &cfg.init, cfg.seed)?;
    let outcome = fit(model, &samples, &split, &cfg.train, par())?;
    let out = cfg.out_dir()?;
    fs::create_dir_all(out)?;
    write(&out.join(CHECKPOINT_FILE), encode_checkpoint(&outcome.best))?;
    write(&out.join("epoch_log.csv"), epoch_log_csv(&outcome.log))?;
    let mut parts = String::from("index,partition\n");
    for (name, idx) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
        for i in idx {
            writeln!(parts, "{i},{name}").unwrap();
        }
    }
    write(&out.join("split.csv"), parts)?;
    if let Some(last) = outcome.log.last() {
        eprintln!(
            "trained {} epochs on {} samples; best epoch {}, final val_acc {:.4}",
            last.epoch,
            split.train.len(),
            outcome.best_epoch,
            last.val_acc
        );
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AblationArg {
    None,
    Rowshuffle,
    Colshuffle,
    Betazero,
}

impl AblationArg {
    pub fn resolve(self, root: u64) -> Ablation {
        match self {
            AblationArg::None => Ablation::None,
            AblationArg::Rowshuffle => Ablation::RowShuffle(seed::derive(root, Purpose::RowShuffle)),
            AblationArg::Colshuffle => Ablation::ColumnShuffle(seed::derive(root, Purpose::ColumnShuffle)),
            AblationArg::Betazero => Ablation::BetaZero,
        }
    }
}

pub fn eval(cfg: &RunConfig, checkpoint: &Path, ablation: AblationArg, all: bool) -> Result<()> {
    let bytes = fs::read(checkpoint).with_context(|| format!("reading {}", checkpoint.display()))?;
    let model = decode_checkpoint(&bytes).context("decoding checkpoint")?;
    let entries = read_dataset(cfg.dataset_dir()?)?;
    let test_idx: Vec<usize> = if all { (0..entries.len()).collect() } else { split_of(&entries, cfg.seed)?.test };
    let test: Vec<_> = test_idx.iter().map(|&i| &entries[i].hist).collect();
    let metrics = evaluate(&model, &test, ablation.resolve(cfg.seed), par())?;
    let rep = report(&metrics)?;
    let out = cfg.out_dir()?;
    rep.write(out)?;
    let mut preds = String::from("index,truth,predicted\n");
    for ((&i, h), p) in test_idx.iter().zip(&test).zip(&metrics.predictions) {
        writeln!(preds, "{i},{},{p}", h.label.map(|l| l.index()).unwrap_or_default()).unwrap();
    }
    write(&out.join("predictions.csv"), preds)?;
    println!("{ablation:?}: accuracy {} over {} samples", snnflow::train::fmt_metric(rep.overall_accuracy), rep.samples);
    Ok(())
}

pub fn gradcheck_cmd(cfg: &RunConfig) -> Result<()> {
    let gc = gradcheck::GradcheckConfig { seed: cfg.seed, ..Default::default() };
    let r = gradcheck::run(&gc)?;
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let text = format!(
        "smooth-mode gradient: max relative error {:.3e} (tolerance {:.0e}) {}\n\
         spiking readout gradient: max relative error {:.3e} (tolerance {:.0e}) {}\n\
         coordinates checked: {}\n",
        r.smooth_max_rel_err,
        gc.smooth_tol,
        verdict(r.smooth_passed),
        r.readout_max_rel_err,
        gc.readout_tol,
        verdict(r.readout_passed),
        r.coordinates_checked
    );
    print!("{text}");
    if let Some(out) = &cfg.out {
        fs::create_dir_all(out)?;
        write(&out.join("gradcheck.txt"), &text)?;
    }
    if !r.passed() {
        bail!("gradient check failed");
    }
    Ok(())
}
