use serde::{Deserialize, Serialize};

use crate::snn::{Gradients, SnnModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moment estimates, one buffer per parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(model: &SnnModel) -> Self {
        let sizes = [model.hidden.weights.data.len(), 1, model.readout.weights.data.len(), 1];
        AdamState {
            step: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Bias-corrected update of one flat parameter slice, using `self.step`
    /// as the (already incremented) time index.
    pub fn update_slice(&mut self, group: usize, params: &mut [f64], grads: &[f64], cfg: &AdamConfig, lr: f64) {
        let t = self.step as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        let (m, v) = (&mut self.m[group], &mut self.v[group]);
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
}

/// |beta_raw| bound. sigmoid(±30) is still strictly inside (0, 1) in f64.
pub const BETA_RAW_LIMIT: f64 = 30.0;

/// One Adam step on all trainable parameters (both weight matrices and both
/// leak parameters). Leak parameters are then clipped to ±[`BETA_RAW_LIMIT`].
pub fn adam_step(model: &mut SnnModel, grads: &Gradients, state: &mut AdamState, cfg: &AdamConfig, lr: f64) {
    state.step += 1;
    let grads = grads.slices();
    for (group, params) in model.param_slices_mut().into_iter().enumerate() {
        state.update_slice(group, params, grads[group], cfg, lr);
    }
    for raw in [&mut model.hidden.beta_raw, &mut model.readout.beta_raw] {
        *raw = raw.clamp(-BETA_RAW_LIMIT, BETA_RAW_LIMIT);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snn::{Architecture, InitConfig};

    fn model() -> SnnModel {
        SnnModel::init(Architecture { inputs: 6, hidden: 3, classes: 2 }, &InitConfig::default(), 2).unwrap()
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut m = model();
        let before = m.clone();
        let mut st = AdamState::new(&m);
        let fresh = st.clone();
        let g = Gradients::zeros_like(&m);
        adam_step(&mut m, &g, &mut st, &AdamConfig::default(), 1e-3);
        assert_eq!(m, before);
        assert_eq!(st.step, 1);
        assert_eq!((st.m.clone(), st.v.clone()), (fresh.m, fresh.v));
    }

    #[test]
    fn first_step_of_unit_gradient() {
        let mut st = AdamState { step: 1, m: vec![vec![0.0]], v: vec![vec![0.0]] };
        let mut p = [0.0];
        st.update_slice(0, &mut p, &[1.0], &AdamConfig::default(), 0.1);
        // m̂ = 1, v̂ = 1 → Δ = −0.1/(1 + 1e−8)
        assert!((p[0] + 0.1 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn identical_inputs_identical_outputs() {
        let (mut a, mut b) = (model(), model());
        let mut g = Gradients::zeros_like(&a);
        g.hidden_w.iter_mut().enumerate().for_each(|(i, x)| *x = (i as f64).sin());
        g.readout_beta_raw = 0.3;
        let (mut sa, mut sb) = (AdamState::new(&a), AdamState::new(&b));
        for _ in 0..5 {
            adam_step(&mut a, &g, &mut sa, &AdamConfig::default(), 1e-2);
            adam_step(&mut b, &g, &mut sb, &AdamConfig::default(), 1e-2);
        }
        assert_eq!(a, b);
        assert_ne!(a, model());
    }

    #[test]
    fn beta_stays_in_unit_interval() {
        let mut m = model();
        let mut st = AdamState::new(&m);
        let mut g = Gradients::zeros_like(&m);
        g.hidden_beta_raw = -1.0;
        g.readout_beta_raw = 1.0;
        for _ in 0..2000 {
            adam_step(&mut m, &g, &mut st, &AdamConfig::default(), 0.5);
        }
        let (bh, br) = (m.hidden.beta(), m.readout.beta());
        assert!(bh > 0.0 && bh < 1.0 && br > 0.0 && br < 1.0, "{bh} {br}");
        assert_eq!(m.hidden.beta_raw, BETA_RAW_LIMIT);
    }
}
