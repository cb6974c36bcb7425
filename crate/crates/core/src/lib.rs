//! Relation extraction between entity mentions in scientific text with a
//! convolutional network over word, relative-position, entity-type and POS channels.
//!
//! The pipeline: [`corpus`] parses standoff annotations, [`textproc`] splits,
//! tokenizes and pairs mentions into candidates, [`strategies`] turns gold relations
//! into labeled presentations, [`model`] trains and queries the network built from
//! [`nn`], [`rules`] post-corrects predictions and [`eval`] scores them.

pub mod corpus;
pub mod embeddings;
pub mod eval;
pub mod labels;
pub mod model;
pub mod nn;
pub mod rules;
pub mod scalar;
pub mod strategies;
pub mod textproc;

pub use labels::{Relation, RelationLabel};
pub use model::{CnnModel, Hyperparams, ModelError};
pub use scalar::Scalar;

pub type Array64 = nn::Array<f64>;
pub type Array32 = nn::Array<f32>;
pub type Model = CnnModel<f64>;
pub type Model32 = CnnModel<f32>;
