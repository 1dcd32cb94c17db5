//! Differentiable building blocks with hand-derived gradients.
//!
//! Every layer comes as a single-example forward/backward pair used by the
//! oracle tests, plus batched forms (examples laid side by side as columns)
//! that the trainers use.

pub mod checkpoint;
mod conv;
mod dense;
mod gradcheck;
mod init;
mod pool;
mod rmsprop;
mod softmax;

pub use conv::{col2im, conv_backward, conv_forward, im2col, relu, ConvCache, ConvGrads, ConvLayer};
pub use dense::{dense_backward, dense_forward, DenseGrads, DenseLayer};
pub use gradcheck::{grad_check, grad_check_coords, relative_error, GradCheckReport, Probe};
pub use init::glorot_uniform;
pub use pool::{max_pool, max_pool_backward, max_pool_segments, max_pool_segments_backward};
pub use rmsprop::{rmsprop_step, OptimizerState, RmsPropConfig};
pub use softmax::{softmax, softmax_xent, SoftmaxXent};
