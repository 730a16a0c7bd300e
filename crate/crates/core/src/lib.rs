//! Asymmetric totally-corrective boosting with column generation.
//!
//! The trainers minimise an asymmetric logistic loss plus an l1 penalty over
//! non-negative stump coefficients, re-optimising every coefficient after each
//! new weak learner. Cascades, evaluation harnesses and data loaders sit on top.

pub mod boost;
pub mod boxsolver;
pub mod cascade;
pub mod data;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod hypothesis;
pub mod losses;
pub mod model;
pub mod stumps;

pub use dataset::{FeatureMatrix, LabeledDataset};
pub use error::{Error, Result};
pub use hypothesis::{Ensemble, Stump};
