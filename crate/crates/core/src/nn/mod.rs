//! A small dense-array engine: the layers of the relation CNN with hand-written
//! backward passes, plain SGD, a finite-difference gradient checker and the binary
//! checkpoint container.

mod array;
pub mod checkpoint;
mod gradcheck;
mod layers;
mod params;

use thiserror::Error;

pub use array::Array;
pub use gradcheck::{grad_check, relative_error, GradCheckReport, Objective, ParamCheck};
pub use layers::{
    conv1d_relu, conv1d_relu_backward, conv1d_relu_backward_into, dense_softmax, dense_softmax_xent, dropout, embed_concat,
    embed_concat_backward, max_pool, max_pool_backward, softmax, ConvGrads, DenseGrads, DropoutMode,
};
pub use params::{sgd_step, Grads, Param, ParamKind, ParamSet};

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("id {id} out of range for a table of {rows} rows (channel {channel})")]
    IdOutOfRange { channel: usize, id: u32, rows: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("non-finite gradient in parameter `{0}`")]
    NonFinite(String),
}
