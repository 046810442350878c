use super::input::InputSequence;
use super::model::{sigmoid, LifParams, Matrix, ReadoutParams, SnnModel, SpikeMode};
use crate::pipeline::FlowHistogram;
use crate::{Error, Result};

/// Leak coefficients actually used in a run. Normally `sigmoid(beta_raw)` of
/// each layer; the β=0 ablation overrides them without touching parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Betas {
    pub hidden: f64,
    pub readout: f64,
}

impl Betas {
    pub fn of(model: &SnnModel) -> Self {
        Betas { hidden: model.hidden.beta(), readout: model.readout.beta() }
    }

    pub const ZERO: Betas = Betas { hidden: 0.0, readout: 0.0 };
}

/// Hidden-layer state, `[steps][neurons]` row-major. Row `t` holds the
/// membrane potential after integrating input step `t` (before the reset it
/// triggers), the spike emitted at that step, and the synaptic drive `W·x[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LifTrace {
    pub steps: usize,
    pub neurons: usize,
    pub potentials: Vec<f64>,
    pub spikes: Vec<f64>,
    pub drive: Vec<f64>,
}

/// Full record of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub steps: usize,
    pub hidden: usize,
    pub classes: usize,
    pub hidden_potentials: Vec<f64>,
    pub hidden_spikes: Vec<f64>,
    pub readout_potentials: Vec<f64>,
    /// Time-mean of the readout potentials.
    pub logits: Vec<f64>,
}

impl ForwardTrace {
    pub fn spike_count(&self) -> f64 {
        self.hidden_spikes.iter().sum()
    }
}

/// `V[n+1] = β(V[n] − Reset[n]) + (1−β)·W·x[n]`, `S[n+1] = θ(V[n+1] − thr)`,
/// `Reset[n+1] = thr·S[n+1]`, starting from `V = Reset = 0`. A spike fires at
/// `V >= thr`. In smooth mode the step function becomes
/// `sigmoid(slope·(V − thr))` and the reset uses that value.
pub(crate) fn lif_run(
    input: &InputSequence,
    weights: &Matrix,
    beta: f64,
    threshold: f64,
    slope: f64,
    mode: SpikeMode,
) -> Result<LifTrace> {
    if input.width() != weights.cols() {
        return Err(Error::shape(
            format!("input width {}", weights.cols()),
            format!("width {}", input.width()),
        ));
    }
    let (steps, n, cols) = (input.steps(), weights.rows(), weights.cols());
    let w = &weights.data;
    let mut potentials = vec![0.0; steps * n];
    let mut spikes = vec![0.0; steps * n];
    let mut drive = vec![0.0; steps * n];
    let mut v_prev = vec![0.0; n];
    let mut reset_prev = vec![0.0; n];
    for t in 0..steps {
        let row = t * n..(t + 1) * n;
        let d = &mut drive[row.clone()];
        for (i, x) in input.step(t) {
            for (h, dh) in d.iter_mut().enumerate() {
                *dh += w[h * cols + i] * x;
            }
        }
        let v = &mut potentials[row.clone()];
        let s = &mut spikes[row];
        for h in 0..n {
            let vh = beta * (v_prev[h] - reset_prev[h]) + (1.0 - beta) * d[h];
            let sh = match mode {
                SpikeMode::Spiking => {
                    if vh >= threshold {
                        1.0
                    } else {
                        0.0
                    }
                }
                SpikeMode::SmoothForward => sigmoid(slope * (vh - threshold)),
            };
            v[h] = vh;
            s[h] = sh;
            v_prev[h] = vh;
            reset_prev[h] = threshold * sh;
        }
    }
    Ok(LifTrace { steps, neurons: n, potentials, spikes, drive })
}

pub fn lif_forward(
    input: &InputSequence,
    params: &LifParams,
    slope: f64,
    mode: SpikeMode,
) -> Result<LifTrace> {
    lif_run(input, &params.weights, params.beta(), params.threshold, slope, mode)
}

pub(crate) fn readout_run(
    spikes: &[f64],
    steps: usize,
    weights: &Matrix,
    beta: f64,
) -> Result<Vec<f64>> {
    let (c, h) = (weights.rows(), weights.cols());
    if spikes.len() != steps * h {
        return Err(Error::shape(format!("{steps}x{h} spikes"), format!("{} values", spikes.len())));
    }
    let w = &weights.data;
    let mut out = vec![0.0; steps * c];
    let mut u = vec![0.0; c];
    let mut ws = vec![0.0; c];
    for t in 0..steps {
        ws.iter_mut().for_each(|x| *x = 0.0);
        for (j, &s) in spikes[t * h..(t + 1) * h].iter().enumerate() {
            if s != 0.0 {
                for (k, wk) in ws.iter_mut().enumerate() {
                    *wk += w[k * h + j] * s;
                }
            }
        }
        for k in 0..c {
            u[k] = beta * u[k] + (1.0 - beta) * ws[k];
        }
        out[t * c..(t + 1) * c].copy_from_slice(&u);
    }
    Ok(out)
}

/// `V[n+1] = β·V[n] + (1−β)·W·S[n]`; never spikes, never resets.
/// `spikes` is `[steps][hidden]` row-major.
pub fn readout_forward(spikes: &[f64], steps: usize, params: &ReadoutParams) -> Result<Vec<f64>> {
    readout_run(spikes, steps, &params.weights, params.beta())
}

fn time_mean(potentials: &[f64], steps: usize, classes: usize) -> Vec<f64> {
    let mut logits = vec![0.0; classes];
    for row in potentials.chunks(classes) {
        for (l, p) in logits.iter_mut().zip(row) {
            *l += p;
        }
    }
    let inv = 1.0 / steps.max(1) as f64;
    logits.iter_mut().for_each(|l| *l *= inv);
    logits
}

/// Forward pass on a prepared input, optionally overriding the leaks.
pub fn forward_input(model: &SnnModel, input: &InputSequence, betas: Option<Betas>) -> Result<ForwardTrace> {
    let betas = betas.unwrap_or_else(|| Betas::of(model));
    let lif = lif_run(
        input,
        &model.hidden.weights,
        betas.hidden,
        model.hidden.threshold,
        model.surrogate_slope,
        model.mode,
    )?;
    let readout = readout_run(&lif.spikes, lif.steps, &model.readout.weights, betas.readout)?;
    let classes = model.readout.weights.rows();
    let logits = time_mean(&readout, lif.steps, classes);
    Ok(ForwardTrace {
        steps: lif.steps,
        hidden: lif.neurons,
        classes,
        hidden_potentials: lif.potentials,
        hidden_spikes: lif.spikes,
        readout_potentials: readout,
        logits,
    })
}

/// Run the network on a histogram: size rows are inputs, time columns are steps.
pub fn forward(model: &SnnModel, hist: &FlowHistogram) -> Result<ForwardTrace> {
    let input = InputSequence::from_histogram(hist, model.input_transform);
    forward_input(model, &input, None)
}

/// Index of the largest logit; ties go to the lowest index.
pub fn predict(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &l) in logits.iter().enumerate().skip(1) {
        if l > logits[best] {
            best = i;
        }
    }
    best
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

/// `−ln softmax(logits)[label]`, evaluated without cancellation when the
/// label's logit dominates.
pub(crate) fn cross_entropy(logits: &[f64], label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(Error::InvalidLabel(label));
    }
    let top = predict(logits);
    let m = logits[top];
    let rest: f64 = logits
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != top)
        .map(|(_, l)| (l - m).exp())
        .sum();
    Ok(m + rest.ln_1p() - logits[label])
}

/// Cross entropy of the softmaxed logits plus `lambda_reg` times the total
/// number of hidden spikes of this sample.
pub fn loss(trace: &ForwardTrace, label: usize, lambda_reg: f64) -> Result<f64> {
    Ok(cross_entropy(&trace.logits, label)? + lambda_reg * trace.spike_count())
}
