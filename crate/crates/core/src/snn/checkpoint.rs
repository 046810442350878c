//! Model checkpoints.
//!
//! Layout (little-endian): `"SNN1"`, u32 inputs, u32 hidden, u32 classes,
//! f64 surrogate slope, u8 mode (0 spiking, 1 smooth), u8 input transform
//! (0 raw, 1 log1p), u16 reserved, f64 threshold, then hidden W
//! (`hidden × inputs`), readout W (`classes × hidden`), hidden beta_raw,
//! readout beta_raw, all f64 row-major.

use super::model::{InputTransform, LifParams, Matrix, ReadoutParams, SnnModel, SpikeMode};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SNN1";
const HEADER_LEN: usize = 4 + 12 + 8 + 4 + 8;

pub fn encode_checkpoint(model: &SnnModel) -> Vec<u8> {
    let arch = model.architecture();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (model.param_count()));
    out.extend_from_slice(CHECKPOINT_MAGIC);
    for d in [arch.inputs, arch.hidden, arch.classes] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&model.surrogate_slope.to_le_bytes());
    out.push(match model.mode {
        SpikeMode::Spiking => 0,
        SpikeMode::SmoothForward => 1,
    });
    out.push(match model.input_transform {
        InputTransform::Raw => 0,
        InputTransform::Log1p => 1,
    });
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&model.hidden.threshold.to_le_bytes());
    for w in model.hidden.weights.data.iter().chain(&model.readout.weights.data) {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&model.hidden.beta_raw.to_le_bytes());
    out.extend_from_slice(&model.readout.beta_raw.to_le_bytes());
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<SnnModel> {
    let bad = |reason: String| Error::format("checkpoint", reason);
    if bytes.len() < HEADER_LEN || &bytes[0..4] != CHECKPOINT_MAGIC {
        return Err(bad("missing SNN1 header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (inputs, hidden, classes) = (u32_at(4), u32_at(8), u32_at(12));
    let slope = f64_at(16);
    let mode = match bytes[24] {
        0 => SpikeMode::Spiking,
        1 => SpikeMode::SmoothForward,
        m => return Err(bad(format!("unknown mode {m}"))),
    };
    let input_transform = match bytes[25] {
        0 => InputTransform::Raw,
        1 => InputTransform::Log1p,
        m => return Err(bad(format!("unknown input transform {m}"))),
    };
    let threshold = f64_at(28);
    let n_hidden_w = hidden * inputs;
    let n_readout_w = classes * hidden;
    let expected = HEADER_LEN + 8 * (n_hidden_w + n_readout_w + 2);
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes, got {}", bytes.len())));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let hidden_w = Matrix::from_vec(hidden, inputs, values[..n_hidden_w].to_vec())?;
    let readout_w = Matrix::from_vec(classes, hidden, values[n_hidden_w..n_hidden_w + n_readout_w].to_vec())?;
    Ok(SnnModel {
        hidden: LifParams { weights: hidden_w, beta_raw: values[n_hidden_w + n_readout_w], threshold },
        readout: ReadoutParams { weights: readout_w, beta_raw: values[n_hidden_w + n_readout_w + 1] },
        surrogate_slope: slope,
        mode,
        input_transform,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snn::{Architecture, InitConfig};

    #[test]
    fn round_trip_exact() {
        let cfg = InitConfig { input_transform: InputTransform::Log1p, ..Default::default() };
        let m = SnnModel::init(Architecture::default(), &cfg, 11).unwrap();
        let bytes = encode_checkpoint(&m);
        assert_eq!(&bytes[..4], b"SNN1");
        assert_eq!(&bytes[4..8], &300u32.to_le_bytes());
        assert_eq!(decode_checkpoint(&bytes).unwrap(), m);
    }

    #[test]
    fn rejects_truncated() {
        let m = SnnModel::init(Architecture { inputs: 3, hidden: 2, classes: 2 }, &InitConfig::default(), 0).unwrap();
        let mut bytes = encode_checkpoint(&m);
        bytes.pop();
        assert!(decode_checkpoint(&bytes).is_err());
        assert!(decode_checkpoint(b"SNN2").is_err());
    }
}
