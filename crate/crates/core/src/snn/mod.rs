//! Two-layer spiking network: a leaky integrate-and-fire hidden layer
//! followed by a non-spiking leaky readout, trained by backpropagation
//! through time with a sigmoid surrogate for the spike derivative.

mod backward;
mod checkpoint;
mod forward;
pub mod gradcheck;
mod input;
mod model;

pub use backward::{backward, batch_gradient, BatchStats, Gradients, SampleStats};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, CHECKPOINT_MAGIC};
pub use forward::{
    forward, forward_input, lif_forward, loss, predict, readout_forward, softmax, Betas,
    ForwardTrace, LifTrace,
};
pub use input::InputSequence;
pub use model::{
    sigmoid, Architecture, InitConfig, InputTransform, LifParams, Matrix, ReadoutParams,
    SnnModel, SpikeMode,
};
