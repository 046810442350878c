//! Reverse-mode sweep over the unrolled network.
//!
//! Hidden layer, per neuron, with `P[t] = V[t−1] − thr·S[t−1]`:
//!
//! ```text
//! V[t] = β·P[t] + (1−β)·I[t],   I[t] = W·x[t],   S[t] = spike(V[t])
//! ```
//!
//! Adjoints are accumulated backwards from `t = T−1`:
//!
//! ```text
//! gS[t] = ∂L/∂S[t] (readout + λ) − β·thr·gV[t+1]
//! gV[t] = gS[t]·σ'(V[t]) + β·gV[t+1]
//! ```
//!
//! where `σ'` is `slope·σ(1−σ)` at `slope·(V − thr)`. The readout only feeds
//! the loss through the time-mean of its potentials, so its adjoint at step
//! `t` is `c[t]·g/T` with `c[t] = 1 + β_r·c[t+1]` and `g = softmax − onehot`.

use super::forward::{cross_entropy, lif_run, predict, readout_run, softmax, Betas};
use super::input::InputSequence;
use super::model::{sigmoid, SnnModel};
use crate::parallel::{self, Parallelism};
use crate::{Error, Result};

/// Loss gradients with the same layout as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub hidden_w: Vec<f64>,
    pub hidden_beta_raw: f64,
    pub readout_w: Vec<f64>,
    pub readout_beta_raw: f64,
}

impl Gradients {
    pub fn zeros_like(model: &SnnModel) -> Self {
        Gradients {
            hidden_w: vec![0.0; model.hidden.weights.data.len()],
            hidden_beta_raw: 0.0,
            readout_w: vec![0.0; model.readout.weights.data.len()],
            readout_beta_raw: 0.0,
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        self.hidden_w.iter_mut().zip(&other.hidden_w).for_each(|(a, b)| *a += b);
        self.readout_w.iter_mut().zip(&other.readout_w).for_each(|(a, b)| *a += b);
        self.hidden_beta_raw += other.hidden_beta_raw;
        self.readout_beta_raw += other.readout_beta_raw;
    }

    pub fn scale(&mut self, k: f64) {
        self.hidden_w.iter_mut().for_each(|a| *a *= k);
        self.readout_w.iter_mut().for_each(|a| *a *= k);
        self.hidden_beta_raw *= k;
        self.readout_beta_raw *= k;
    }

    /// Same order as [`SnnModel::param_slices_mut`].
    pub fn slices(&self) -> [&[f64]; 4] {
        [
            &self.hidden_w,
            std::slice::from_ref(&self.hidden_beta_raw),
            &self.readout_w,
            std::slice::from_ref(&self.readout_beta_raw),
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|&g| g == 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub loss: f64,
    pub cross_entropy: f64,
    pub spikes: f64,
    pub predicted: usize,
}

/// Gradient of `cross_entropy + lambda_reg·Σspikes` for one sample.
pub fn backward(
    model: &SnnModel,
    input: &InputSequence,
    label: usize,
    lambda_reg: f64,
) -> Result<(Gradients, SampleStats)> {
    let mut grads = Gradients::zeros_like(model);
    let stats = backward_into(model, input, label, lambda_reg, &mut grads)?;
    Ok((grads, stats))
}

/// Like [`backward`] but accumulates into `grads`.
#[allow(clippy::needless_range_loop)]
fn backward_into(
    model: &SnnModel,
    input: &InputSequence,
    label: usize,
    lambda_reg: f64,
    grads: &mut Gradients,
) -> Result<SampleStats> {
    let classes = model.readout.weights.rows();
    if label >= classes {
        return Err(Error::InvalidLabel(label));
    }
    let Betas { hidden: beta, readout: beta_r } = Betas::of(model);
    let thr = model.hidden.threshold;
    let slope = model.surrogate_slope;
    let lif = lif_run(input, &model.hidden.weights, beta, thr, slope, model.mode)?;
    let steps = lif.steps;
    let n = lif.neurons;
    let readout = readout_run(&lif.spikes, steps, &model.readout.weights, beta_r)?;

    let mut logits = vec![0.0; classes];
    for row in readout.chunks(classes) {
        for (l, p) in logits.iter_mut().zip(row) {
            *l += p;
        }
    }
    let inv_t = 1.0 / steps.max(1) as f64;
    logits.iter_mut().for_each(|l| *l *= inv_t);
    let ce = cross_entropy(&logits, label)?;
    let spikes: f64 = lif.spikes.iter().sum();

    let mut g = softmax(&logits);
    g[label] -= 1.0;
    let wr = &model.readout.weights.data;
    // wg = W_rᵀ·g
    let mut wg = vec![0.0; n];
    for (k, gk) in g.iter().enumerate() {
        for (j, wgj) in wg.iter_mut().enumerate() {
            *wgj += wr[k * n + j] * gk;
        }
    }

    // readout pass: c[t] weights, ∂L/∂W_r, ∂L/∂β_r
    let mut c = vec![0.0; steps];
    let mut acc = 0.0;
    for t in (0..steps).rev() {
        acc = 1.0 + beta_r * acc;
        c[t] = acc;
    }
    let mut weighted_spikes = vec![0.0; n];
    let mut d_beta_r = 0.0;
    for t in 0..steps {
        let s = &lif.spikes[t * n..(t + 1) * n];
        let mut ws = 0.0;
        for j in 0..n {
            if s[j] != 0.0 {
                weighted_spikes[j] += c[t] * s[j];
                ws += wg[j] * s[j];
            }
        }
        let gu_prev = if t == 0 {
            0.0
        } else {
            g.iter().zip(&readout[(t - 1) * classes..t * classes]).map(|(a, b)| a * b).sum()
        };
        d_beta_r += c[t] * (gu_prev - ws);
    }
    d_beta_r *= inv_t;
    let kr = (1.0 - beta_r) * inv_t;
    for (k, gk) in g.iter().enumerate() {
        for j in 0..n {
            grads.readout_w[k * n + j] += kr * gk * weighted_spikes[j];
        }
    }
    grads.readout_beta_raw += d_beta_r * beta_r * (1.0 - beta_r);

    // hidden pass, t = T−1 … 0
    let cols = model.hidden.weights.cols();
    let mut gv_next = vec![0.0; n];
    let mut d_beta = 0.0;
    let one_minus_beta = 1.0 - beta;
    for t in (0..steps).rev() {
        let row = t * n..(t + 1) * n;
        let v = &lif.potentials[row.clone()];
        let drive = &lif.drive[row];
        let readout_scale = kr * c[t];
        for h in 0..n {
            let sig = sigmoid(slope * (v[h] - thr));
            let surrogate = slope * sig * (1.0 - sig);
            let gs = readout_scale * wg[h] + lambda_reg - beta * thr * gv_next[h];
            let gv = gs * surrogate + beta * gv_next[h];
            let p = if t == 0 {
                0.0
            } else {
                lif.potentials[(t - 1) * n + h] - thr * lif.spikes[(t - 1) * n + h]
            };
            d_beta += gv * (p - drive[h]);
            gv_next[h] = gv;
        }
        for (i, x) in input.step(t) {
            let k = one_minus_beta * x;
            for h in 0..n {
                grads.hidden_w[h * cols + i] += k * gv_next[h];
            }
        }
    }
    grads.hidden_beta_raw += d_beta * beta * (1.0 - beta);

    Ok(SampleStats {
        loss: ce + lambda_reg * spikes,
        cross_entropy: ce,
        spikes,
        predicted: predict(&logits),
    })
}

/// Aggregate over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BatchStats {
    pub samples: usize,
    pub mean_loss: f64,
    pub mean_cross_entropy: f64,
    pub mean_spikes: f64,
    pub correct: usize,
}

const CHUNK: usize = 8;

/// Mean gradient over `batch`. Samples are processed in fixed chunks whose
/// partial sums are added in order, so the result does not depend on the
/// thread count or on `par`.
pub fn batch_gradient(
    model: &SnnModel,
    batch: &[(&InputSequence, usize)],
    lambda_reg: f64,
    par: Parallelism,
) -> Result<(Gradients, BatchStats)> {
    let partials = parallel::map_chunks(batch, CHUNK, par, |_, chunk| {
        let mut g = Gradients::zeros_like(model);
        let mut st = BatchStats::default();
        for &(input, label) in chunk {
            let s = backward_into(model, input, label, lambda_reg, &mut g)?;
            st.samples += 1;
            st.mean_loss += s.loss;
            st.mean_cross_entropy += s.cross_entropy;
            st.mean_spikes += s.spikes;
            st.correct += usize::from(s.predicted == label);
        }
        Ok::<_, Error>((g, st))
    });
    let mut total = Gradients::zeros_like(model);
    let mut stats = BatchStats::default();
    for p in partials {
        let (g, st) = p?;
        total.add_assign(&g);
        stats.samples += st.samples;
        stats.mean_loss += st.mean_loss;
        stats.mean_cross_entropy += st.mean_cross_entropy;
        stats.mean_spikes += st.mean_spikes;
        stats.correct += st.correct;
    }
    if stats.samples > 0 {
        let inv = 1.0 / stats.samples as f64;
        total.scale(inv);
        stats.mean_loss *= inv;
        stats.mean_cross_entropy *= inv;
        stats.mean_spikes *= inv;
    }
    Ok((total, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snn::{forward_input, loss, Architecture, InitConfig, SpikeMode};

    fn small_model(mode: SpikeMode, seed: u64) -> SnnModel {
        let arch = Architecture { inputs: 5, hidden: 4, classes: 3 };
        let cfg = InitConfig { hidden_gain: 3.0, surrogate_slope: 3.0, mode, ..Default::default() };
        SnnModel::init(arch, &cfg, seed).unwrap()
    }

    fn input(seed: u64) -> InputSequence {
        let mut rng = crate::seed::rng(seed);
        use rand::Rng;
        let d: Vec<f64> = (0..50)
            .map(|_| if rng.random_bool(0.4) { rng.random_range(0.0..2.0) } else { 0.0 })
            .collect();
        InputSequence::from_dense(10, 5, &d).unwrap()
    }

    #[test]
    fn zero_input_zero_gradient() {
        let m = small_model(SpikeMode::Spiking, 1);
        let x = InputSequence::from_dense(10, 5, &[0.0; 50]).unwrap();
        let (g, st) = backward(&m, &x, 2, 0.0).unwrap();
        assert!(g.is_zero());
        assert_eq!(st.spikes, 0.0);
        assert!((st.loss - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn stats_match_forward() {
        for mode in [SpikeMode::Spiking, SpikeMode::SmoothForward] {
            let m = small_model(mode, 4);
            let x = input(9);
            let (_, st) = backward(&m, &x, 1, 0.01).unwrap();
            let tr = forward_input(&m, &x, None).unwrap();
            assert_eq!(st.loss, loss(&tr, 1, 0.01).unwrap());
        }
    }

    #[test]
    fn smooth_gradient_matches_central_difference() {
        let mut m = small_model(SpikeMode::SmoothForward, 2);
        let x = input(3);
        let (g, _) = backward(&m, &x, 0, 0.05).unwrap();
        let eps = 1e-5;
        let f = |m: &SnnModel| loss(&forward_input(m, &x, None).unwrap(), 0, 0.05).unwrap();
        for (which, idx) in [(0usize, 7usize), (0, 13), (1, 0), (2, 5), (3, 0)] {
            let analytic = g.slices()[which][idx];
            let orig = m.param_slices_mut()[which][idx];
            m.param_slices_mut()[which][idx] = orig + eps;
            let up = f(&m);
            m.param_slices_mut()[which][idx] = orig - eps;
            let down = f(&m);
            m.param_slices_mut()[which][idx] = orig;
            let numeric = (up - down) / (2.0 * eps);
            assert!(
                (analytic - numeric).abs() <= 1e-6 * analytic.abs().max(1e-3),
                "param {which}[{idx}]: {analytic} vs {numeric}"
            );
        }
    }

    #[test]
    fn batch_mean_is_deterministic() {
        let m = small_model(SpikeMode::Spiking, 5);
        let xs: Vec<InputSequence> = (0..21).map(input).collect();
        let batch: Vec<(&InputSequence, usize)> = xs.iter().enumerate().map(|(i, x)| (x, i % 3)).collect();
        let (a, sa) = batch_gradient(&m, &batch, 1e-3, Parallelism::Sequential).unwrap();
        let (b, sb) = batch_gradient(&m, &batch, 1e-3, Parallelism::available()).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        let mut manual = Gradients::zeros_like(&m);
        for &(x, y) in &batch {
            manual.add_assign(&backward(&m, x, y, 1e-3).unwrap().0);
        }
        manual.scale(1.0 / 21.0);
        for (p, q) in manual.hidden_w.iter().zip(&a.hidden_w) {
            assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
        }
    }

    #[test]
    fn invalid_label() {
        let m = small_model(SpikeMode::Spiking, 1);
        assert!(matches!(backward(&m, &input(1), 3, 0.0), Err(Error::InvalidLabel(3))));
    }
}
