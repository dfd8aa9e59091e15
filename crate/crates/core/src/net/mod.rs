//! 3D convolutional encoder-decoder, multi-resolution loss, Adam and the
//! training loop.

pub mod adam;
pub mod checkpoint;
pub mod infer;
pub mod loss;
pub mod model;
pub mod ops;
mod tensor;
pub mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC};
pub use infer::{bench, infer};
pub use loss::{level_loss, total_loss, LossConfig, LossTargets};
pub use model::{backward, forward, forward_train, organ_mask, ForwardCache, LayerSpec, NetworkConfig, NetworkParams, Outputs};
pub use ops::ShapeError;
pub use tensor::{Scalar, Tensor};
pub use train::{mean_loss, train, EpochRecord, TrainError, Trainer, TrainingConfig, TrainingItem, TrainingOutcome};
