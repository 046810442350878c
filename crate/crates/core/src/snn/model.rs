use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`sigmoid`] on `(0, 1)`.
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Dense row-major matrix, `rows` = output units, `cols` = input units.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!("{rows}x{cols}"), format!("{} values", data.len())));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn scale(&mut self, k: f64) {
        self.data.iter_mut().for_each(|w| *w *= k);
    }
}

/// Spiking hidden layer. β = sigmoid(beta_raw) keeps the leak in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LifParams {
    pub weights: Matrix,
    pub beta_raw: f64,
    pub threshold: f64,
}

impl LifParams {
    pub fn beta(&self) -> f64 {
        sigmoid(self.beta_raw)
    }
}

/// Leaky integrator readout with no threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutParams {
    pub weights: Matrix,
    pub beta_raw: f64,
}

impl ReadoutParams {
    pub fn beta(&self) -> f64 {
        sigmoid(self.beta_raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SpikeMode {
    /// Heaviside spikes forward, sigmoid-derivative surrogate backward.
    #[default]
    Spiking,
    /// Sigmoid spikes forward; backward is the exact gradient.
    SmoothForward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InputTransform {
    #[default]
    Raw,
    Log1p,
}

impl InputTransform {
    pub fn apply(self, count: u32) -> f64 {
        match self {
            InputTransform::Raw => count as f64,
            InputTransform::Log1p => (count as f64).ln_1p(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub inputs: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture { inputs: 300, hidden: 100, classes: 14 }
    }
}

/// Initial parameter distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitConfig {
    /// Initial leak of both layers; e^(-200 ms / 600 ms) by default.
    pub beta0: f64,
    /// Hidden weights ~ N(0, (hidden_gain / sqrt(inputs))²).
    pub hidden_gain: f64,
    /// Readout weights ~ N(0, (readout_gain / sqrt(hidden))²).
    pub readout_gain: f64,
    pub threshold: f64,
    pub surrogate_slope: f64,
    pub mode: SpikeMode,
    pub input_transform: InputTransform,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            beta0: (-0.2f64 / 0.6).exp(),
            hidden_gain: 10.0,
            readout_gain: 1.0,
            threshold: 1.0,
            surrogate_slope: 10.0,
            mode: SpikeMode::Spiking,
            input_transform: InputTransform::Raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnnModel {
    pub hidden: LifParams,
    pub readout: ReadoutParams,
    pub surrogate_slope: f64,
    pub mode: SpikeMode,
    pub input_transform: InputTransform,
}

impl SnnModel {
    /// Random initialization, deterministic in `seed`.
    pub fn init(arch: Architecture, cfg: &InitConfig, seed: u64) -> Result<Self> {
        if arch.inputs == 0 || arch.hidden == 0 || arch.classes == 0 {
            return Err(Error::Config(format!("architecture has a zero dimension: {arch:?}")));
        }
        if !(cfg.beta0 > 0.0 && cfg.beta0 < 1.0) {
            return Err(Error::Config(format!("beta0 must lie in (0, 1), got {}", cfg.beta0)));
        }
        let mut rng = seed::rng_for(seed, seed::Purpose::Init);
        let mut draw = |rows: usize, cols: usize, gain: f64| {
            let normal = Normal::new(0.0, gain / (cols as f64).sqrt()).unwrap();
            let data = (0..rows * cols).map(|_| normal.sample(&mut rng)).collect();
            Matrix { rows, cols, data }
        };
        let hidden_w = draw(arch.hidden, arch.inputs, cfg.hidden_gain);
        let readout_w = draw(arch.classes, arch.hidden, cfg.readout_gain);
        let beta_raw = logit(cfg.beta0);
        Ok(SnnModel {
            hidden: LifParams { weights: hidden_w, beta_raw, threshold: cfg.threshold },
            readout: ReadoutParams { weights: readout_w, beta_raw },
            surrogate_slope: cfg.surrogate_slope,
            mode: cfg.mode,
            input_transform: cfg.input_transform,
        })
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            inputs: self.hidden.weights.cols(),
            hidden: self.hidden.weights.rows(),
            classes: self.readout.weights.rows(),
        }
    }

    /// Trainable parameters in a fixed order: hidden W, hidden beta_raw,
    /// readout W, readout beta_raw.
    pub fn param_slices_mut(&mut self) -> [&mut [f64]; 4] {
        [
            &mut self.hidden.weights.data,
            std::slice::from_mut(&mut self.hidden.beta_raw),
            &mut self.readout.weights.data,
            std::slice::from_mut(&mut self.readout.beta_raw),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.hidden.weights.data.len() + self.readout.weights.data.len() + 2
    }
}
