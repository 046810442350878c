use super::model::InputTransform;
use crate::pipeline::FlowHistogram;
use crate::{Error, Result};

/// Sparse input spike train: for each time step, the non-zero
/// `(input index, value)` pairs in increasing index order.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSequence {
    width: usize,
    offsets: Vec<usize>,
    index: Vec<u32>,
    value: Vec<f64>,
}

impl InputSequence {
    /// Time column `n` of the histogram drives step `n`; size rows are inputs.
    pub fn from_histogram(hist: &FlowHistogram, transform: InputTransform) -> Self {
        let mut offsets = Vec::with_capacity(hist.cols() + 1);
        offsets.push(0);
        let mut index = Vec::with_capacity(hist.cells().len());
        let mut value = Vec::with_capacity(hist.cells().len());
        for col in 0..hist.cols() {
            for c in hist.column(col) {
                index.push(c.row as u32);
                value.push(transform.apply(c.count));
            }
            offsets.push(index.len());
        }
        InputSequence { width: hist.rows(), offsets, index, value }
    }

    /// From a row-major `[steps][width]` dense array.
    pub fn from_dense(steps: usize, width: usize, data: &[f64]) -> Result<Self> {
        if data.len() != steps * width {
            return Err(Error::shape(format!("{steps}x{width}"), format!("{} values", data.len())));
        }
        let mut offsets = vec![0];
        let mut index = Vec::new();
        let mut value = Vec::new();
        for row in data.chunks(width.max(1)).take(steps) {
            for (i, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    index.push(i as u32);
                    value.push(v);
                }
            }
            offsets.push(index.len());
        }
        offsets.resize(steps + 1, index.len());
        Ok(InputSequence { width, offsets, index, value })
    }

    pub fn steps(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Non-zero entries of step `t`.
    pub fn step(&self, t: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[t]..self.offsets[t + 1];
        self.index[r.clone()].iter().map(|&i| i as usize).zip(self.value[r].iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.steps() * self.width];
        for t in 0..self.steps() {
            for (i, v) in self.step(t) {
                out[t * self.width + i] = v;
            }
        }
        out
    }
}
