//! Small deterministic neural-network engine: dense tensors, the layers
//! needed by the CNN and LSTM classifiers, analytic gradients, Adam/SGD,
//! mini-batch training, and checkpoints.

pub mod arch;
pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod network;
pub mod optim;
pub mod tensor;
pub mod train;

pub use arch::{ArchOptions, Architecture};
pub use loss::{binary_cross_entropy, one_hot, weighted_cross_entropy, LossKind};
pub use network::{LayerSpec, Network};
pub use optim::OptimizerKind;
pub use tensor::Tensor;
pub use train::{evaluate, train, EpochStats, History, LabeledSet, TrainConfig};
