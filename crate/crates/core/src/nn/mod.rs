//! Small neural-network engine with hand-written backward passes.

mod io;
mod layers;
mod network;
mod optim;
mod tensor;

pub use io::{from_bytes, load_weights, save_weights, to_bytes, WeightFileError, MAGIC, VERSION};
pub use layers::{leaky_relu, leaky_relu_backward, leaky_relu_vec, Conv2d, Dense, LstmCache, LstmCell, LEAKY_SLOPE};
pub use network::{
    DoubleQ, DrqnNetwork, Hidden, InputGrads, Mfe, MfeCache, NetCache, NetworkShape, LSTM_HIDDEN, MAP_CHANNELS,
    MAP_SIDE, MFE_OUT, TENSOR_NAMES,
};
pub use optim::{clip_grad_norm, grad_norm, scale_grads, Adam};
pub use tensor::{NnError, Scalar, Tensor};
