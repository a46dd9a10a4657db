//! Corpus characterization for synthetic training data.
//!
//! Generated corpora are compared against the train and test splits of a
//! reference dataset on quantity (uniqueness, vocabulary gain), fluency
//! (grammar, plausibility), and semantic and syntactic set similarity.

pub mod config;
pub mod corpus;
mod error;
pub mod fluency;
pub mod http;
pub mod quantity;
pub mod report;
pub mod semantic;
pub mod setscore;
pub mod stats;
pub mod syntactic;
pub mod tradeoff;

pub use error::{Error, Result};
