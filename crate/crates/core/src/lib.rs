//! Big Five trait learning from review text: lexicon labeling, corpus
//! preparation, vocabulary, skip-gram embeddings, the model catalog and
//! evaluation. The neural engine lives in the `autonet` crate.

pub mod corpus;
pub mod embedding;
mod error;
pub mod eval;
pub mod features;
pub mod gradsuite;
pub mod lexicon;
pub mod models;
pub mod provenance;
pub mod split;
pub mod stem;
pub mod synthetic;
pub mod vocab;

pub use error::{Error, Result};
