pub mod checkpoint;
pub mod corpus;
pub mod crf;
pub mod embedding;
pub mod encoder;
pub mod error;
pub mod evaluator;
pub mod features;
pub mod synthetic;
pub mod trainer;

pub use error::{Error, Result};
