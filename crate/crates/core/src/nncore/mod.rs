//! Dense feedforward networks with analytic gradients.

pub mod activation;
pub mod gradcheck;
pub mod matrix;
pub mod network;
pub mod ops;
pub mod optim;
pub mod serial;
pub mod train;

pub use activation::{sigmoid, ActivationKind};
pub use gradcheck::{gradient_check, kink_margin};
pub use matrix::Matrix;
pub use network::{
    BatchNormLayer, BatchNormState, DenseLayer, DropoutMasks, ForwardCache, Gradients, Mode, NetworkParams,
    OutputHead,
};
pub use ops::{log_continue_probability, log_step_probability, log_sum_exp, softmax, softplus, step_probability};
pub use optim::RmsPropState;
pub use train::{fit, BatchContext, EpochRecord, FitResult, Objective, TrainConfig};
