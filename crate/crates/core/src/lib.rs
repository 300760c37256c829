//! Conditional word-embedding training and information-geometric measures.
//!
//! The pipeline: build a vocabulary and co-occurrence matrix from text
//! ([`corpus`]), fit center/context vectors by weighted least squares
//! ([`trainer`]), view each word as a conditional distribution on the
//! probability simplex ([`geometry`]), project its alpha-logarithmic map
//! onto the model's tangent space to obtain alpha-embeddings ([`alpha`]),
//! and score similarity and analogy tasks with Fisher-metric variants
//! ([`measures`], [`eval`]).

pub mod alpha;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod measures;
pub mod trainer;
pub mod util;

pub use error::{Error, Result};
