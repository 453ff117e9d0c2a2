//! The histogram-dense neural estimator.
//!
//! A fixed (non-trainable) histogram layer turns a delay record into bin
//! counts — encoding the physical fact that the ordering of delays carries
//! no information — followed by a small stack of dense layers trained from
//! scratch with Adam on the mean squared logarithmic error.

mod histogram;
mod io;
mod model;
mod train;

pub use histogram::{histogram_features, HistogramSpec};
pub use model::{Activation, ArchKind, DenseLayer, HistDenseModel};
pub use train::{
    add_target_noise, max_gradcheck_error, msle_loss, train, LossHistory, TrainConfig,
};
