//! Finite-difference checks of the analytic gradients on small random networks.
//!
//! The numeric side only calls the forward pass and the loss, so it shares
//! no code with the reverse sweep it checks.

use rand::Rng;

use super::backward::backward;
use super::forward::{forward_input, loss};
use super::input::InputSequence;
use super::model::{Architecture, InitConfig, SnnModel, SpikeMode};
use crate::seed;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckConfig {
    pub instances: usize,
    pub steps: usize,
    pub arch: Architecture,
    pub lambda_reg: f64,
    /// Central-difference step and tolerance for the smooth network.
    pub smooth_eps: f64,
    pub smooth_tol: f64,
    /// Five-point-stencil step and tolerance for the readout of the spiking network.
    pub readout_eps: f64,
    pub readout_tol: f64,
    /// Magnitudes below this are compared absolutely rather than relatively.
    pub abs_floor: f64,
    pub seed: u64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        GradcheckConfig {
            instances: 20,
            steps: 10,
            arch: Architecture { inputs: 5, hidden: 4, classes: 3 },
            lambda_reg: 0.01,
            smooth_eps: 1e-4,
            smooth_tol: 1e-4,
            readout_eps: 1e-3,
            readout_tol: 1e-6,
            abs_floor: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub smooth_max_rel_err: f64,
    pub readout_max_rel_err: f64,
    pub coordinates_checked: usize,
    pub smooth_passed: bool,
    pub readout_passed: bool,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.smooth_passed && self.readout_passed
    }
}

pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// A random network and input for one check instance.
pub fn random_instance(cfg: &GradcheckConfig, index: usize, mode: SpikeMode) -> (SnnModel, InputSequence, usize) {
    let mut rng = seed::rng(seed::child(seed::derive(cfg.seed, seed::Purpose::Gradcheck), index as u64));
    let init = InitConfig {
        beta0: rng.random_range(0.2..0.9),
        hidden_gain: rng.random_range(1.0..4.0),
        readout_gain: rng.random_range(0.5..2.0),
        surrogate_slope: 10.0,
        mode,
        ..Default::default()
    };
    let mut model = SnnModel::init(cfg.arch, &init, rng.random()).unwrap();
    model.readout.beta_raw += rng.random_range(-1.0..1.0);
    let n = cfg.steps * cfg.arch.inputs;
    let dense: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.5) { rng.random_range(0.0..3.0) } else { 0.0 })
        .collect();
    let input = InputSequence::from_dense(cfg.steps, cfg.arch.inputs, &dense).unwrap();
    let label = rng.random_range(0..cfg.arch.classes);
    (model, input, label)
}

/// Finite-difference rule used by [`numeric_partial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// `(f(x+h) − f(x−h)) / 2h`, error O(h²).
    Central,
    /// `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h`, error O(h⁴).
    FivePoint,
}

/// Finite-difference partial of the loss with respect to parameter group
/// `group` (see [`SnnModel::param_slices_mut`]) at position `idx`.
#[allow(clippy::too_many_arguments)]
pub fn numeric_partial(
    model: &mut SnnModel,
    input: &InputSequence,
    label: usize,
    lambda_reg: f64,
    group: usize,
    idx: usize,
    eps: f64,
    stencil: Stencil,
) -> Result<f64> {
    let orig = model.param_slices_mut()[group][idx];
    let mut at = |offset: f64| -> Result<f64> {
        model.param_slices_mut()[group][idx] = orig + offset;
        let l = loss(&forward_input(model, input, None)?, label, lambda_reg);
        model.param_slices_mut()[group][idx] = orig;
        l
    };
    Ok(match stencil {
        Stencil::Central => (at(eps)? - at(-eps)?) / (2.0 * eps),
        Stencil::FivePoint => {
            (-at(2.0 * eps)? + 8.0 * at(eps)? - 8.0 * at(-eps)? + at(-2.0 * eps)?) / (12.0 * eps)
        }
    })
}

/// Smooth network: every coordinate. Spiking network: readout weights and
/// readout leak only, since hidden spikes do not move under those.
pub fn run(cfg: &GradcheckConfig) -> Result<GradcheckReport> {
    let mut smooth_max = 0.0f64;
    let mut readout_max = 0.0f64;
    let mut checked = 0;
    for i in 0..cfg.instances {
        let (mut model, input, label) = random_instance(cfg, i, SpikeMode::SmoothForward);
        let (grads, _) = backward(&model, &input, label, cfg.lambda_reg)?;
        let analytic: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();
        for (group, values) in analytic.iter().enumerate() {
            for (idx, &a) in values.iter().enumerate() {
                let n = numeric_partial(&mut model, &input, label, cfg.lambda_reg, group, idx, cfg.smooth_eps, Stencil::Central)?;
                smooth_max = smooth_max.max(relative_error(a, n, cfg.abs_floor));
                checked += 1;
            }
        }

        let (mut model, input, label) = random_instance(cfg, i, SpikeMode::Spiking);
        let (grads, _) = backward(&model, &input, label, cfg.lambda_reg)?;
        let analytic: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();
        for group in [2, 3] {
            for (idx, &a) in analytic[group].iter().enumerate() {
                let n = numeric_partial(&mut model, &input, label, cfg.lambda_reg, group, idx, cfg.readout_eps, Stencil::FivePoint)?;
                readout_max = readout_max.max(relative_error(a, n, cfg.abs_floor));
                checked += 1;
            }
        }
    }
    Ok(GradcheckReport {
        smooth_max_rel_err: smooth_max,
        readout_max_rel_err: readout_max,
        coordinates_checked: checked,
        smooth_passed: smooth_max < cfg.smooth_tol,
        readout_passed: readout_max < cfg.readout_tol,
    })
}
