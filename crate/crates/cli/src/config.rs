//! Flat `key = value` run configuration. Precedence: flag > file > default.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use snnflow::pipeline::HistogramConfig;
use snnflow::snn::{Architecture, InitConfig, InputTransform};
use snnflow::synth::SuiteConfig;
use snnflow::train::{PlateauConfig, TrainConfig};

/// Every key the config file may set. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub dataset: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    // histogram
    pub time_bins: Option<usize>,
    pub size_bins_per_dir: Option<usize>,
    pub max_size: Option<f64>,
    pub window_s: Option<f64>,
    pub stride_s: Option<f64>,
    // training
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub lr0: Option<f64>,
    pub lambda_reg: Option<f64>,
    pub plateau_factor: Option<f64>,
    pub plateau_patience: Option<usize>,
    pub plateau_threshold: Option<f64>,
    pub min_lr: Option<f64>,
    // network
    pub hidden: Option<usize>,
    pub beta0: Option<f64>,
    pub hidden_gain: Option<f64>,
    pub readout_gain: Option<f64>,
    pub threshold: Option<f64>,
    pub surrogate_slope: Option<f64>,
    pub log1p: Option<bool>,
    // synthetic suite
    pub flows_per_class: Option<usize>,
    pub duration: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Fully resolved settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub dataset: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub histogram: HistogramConfig,
    pub train: TrainConfig,
    pub init: InitConfig,
    pub hidden: usize,
    pub suite: SuiteConfig,
}

/// Values given on the command line; each wins over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub dataset: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub epochs: Option<usize>,
    pub flows_per_class: Option<usize>,
}

impl RunConfig {
    pub fn resolve(file: FileConfig, flags: Overrides) -> Result<Self> {
        let Some(seed) = flags.seed.or(file.seed) else {
            bail!("a seed is required (--seed or `seed` in the config file)");
        };
        let hd = HistogramConfig::default();
        let histogram = HistogramConfig {
            time_bins: file.time_bins.unwrap_or(hd.time_bins),
            size_bins_per_dir: file.size_bins_per_dir.unwrap_or(hd.size_bins_per_dir),
            max_size: file.max_size.unwrap_or(hd.max_size),
            window_s: file.window_s.unwrap_or(hd.window_s),
            stride_s: file.stride_s.unwrap_or(hd.stride_s),
        };
        histogram.validate()?;
        let td = TrainConfig::default();
        let pd = PlateauConfig::default();
        let train = TrainConfig {
            batch_size: file.batch_size.unwrap_or(td.batch_size),
            epochs: flags.epochs.or(file.epochs).unwrap_or(td.epochs),
            lr0: file.lr0.unwrap_or(td.lr0),
            adam: td.adam,
            plateau: PlateauConfig {
                factor: file.plateau_factor.unwrap_or(pd.factor),
                patience: file.plateau_patience.unwrap_or(pd.patience),
                threshold: file.plateau_threshold.unwrap_or(pd.threshold),
                min_lr: file.min_lr.unwrap_or(pd.min_lr),
            },
            lambda_reg: file.lambda_reg.unwrap_or(td.lambda_reg),
            seed,
        };
        train.validate()?;
        let id = InitConfig::default();
        let init = InitConfig {
            beta0: file.beta0.unwrap_or(id.beta0),
            hidden_gain: file.hidden_gain.unwrap_or(id.hidden_gain),
            readout_gain: file.readout_gain.unwrap_or(id.readout_gain),
            threshold: file.threshold.unwrap_or(id.threshold),
            surrogate_slope: file.surrogate_slope.unwrap_or(id.surrogate_slope),
            mode: id.mode,
            input_transform: if file.log1p.unwrap_or(false) { InputTransform::Log1p } else { InputTransform::Raw },
        };
        let sd = SuiteConfig::default();
        let suite = SuiteConfig {
            flows_per_class: flags.flows_per_class.or(file.flows_per_class).unwrap_or(sd.flows_per_class),
            duration: file.duration.unwrap_or(sd.duration),
            seed,
        };
        if suite.flows_per_class == 0 || suite.duration.is_nan() || suite.duration <= 0.0 {
            bail!("flows_per_class and duration must be positive");
        }
        let threads = flags.threads.or(file.threads);
        if threads == Some(0) {
            bail!("threads must be at least 1");
        }
        Ok(RunConfig {
            seed,
            threads,
            dataset: flags.dataset.or(file.dataset),
            manifest: flags.manifest.or(file.manifest),
            out: flags.out.or(file.out),
            histogram,
            train,
            init,
            hidden: file.hidden.unwrap_or(Architecture::default().hidden),
            suite,
        })
    }

    pub fn architecture(&self) -> Architecture {
        Architecture { inputs: self.histogram.rows(), hidden: self.hidden, classes: snnflow::train::NUM_CLASSES }
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out.as_deref().context("an output directory is required (--out or `out` in the config file)")
    }

    pub fn dataset_dir(&self) -> Result<&Path> {
        let d = self.dataset.as_deref().context("a dataset directory is required (--dataset or `dataset` in the config file)")?;
        if !d.is_dir() {
            bail!("dataset directory {} does not exist", d.display());
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flag_file_default() {
        let file: FileConfig = toml::from_str("seed = 3\nepochs = 7\nlr0 = 0.5\nlog1p = true").unwrap();
        let cfg = RunConfig::resolve(file.clone(), Overrides { epochs: Some(2), ..Default::default() }).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.train.epochs, 2);
        assert_eq!(cfg.train.lr0, 0.5);
        assert_eq!(cfg.train.batch_size, 128);
        assert_eq!(cfg.init.input_transform, InputTransform::Log1p);
        let cfg = RunConfig::resolve(file, Overrides { seed: Some(9), ..Default::default() }).unwrap();
        assert_eq!((cfg.seed, cfg.train.seed, cfg.suite.seed), (9, 9, 9));
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(RunConfig::resolve(FileConfig::default(), Overrides::default()).is_err());
    }

    #[test]
    fn unknown_and_malformed_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("sede = 1").is_err());
        assert!(toml::from_str::<FileConfig>("epochs = \"many\"").is_err());
    }
}
