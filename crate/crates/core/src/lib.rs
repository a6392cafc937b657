//! Feature-based short answer scoring: linguistic preprocessing, nine
//! feature groups, a random-forest regressor with per-feature attribution,
//! quadratic weighted kappa evaluation and feedback reports.
//!
//! The numeric core is generic over the floating-point type; the aliases
//! below fix it to `f64` or `f32`.

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod features;
pub mod feedback;
pub mod forest;
pub mod model;
pub mod scalar;
pub mod synthetic;
pub mod textproc;

pub use error::{Error, Result};

pub type Forest64 = forest::Forest<f64>;
pub type Forest32 = forest::Forest<f32>;
pub type Contribution64 = forest::Contribution<f64>;
pub type Contribution32 = forest::Contribution<f32>;
pub type EmbeddingTable64 = embeddings::EmbeddingTable<f64>;
pub type EmbeddingTable32 = embeddings::EmbeddingTable<f32>;
pub type FeatureResources64 = features::FeatureResources<f64>;
pub type FeatureResources32 = features::FeatureResources<f32>;
pub type PromptModel64 = model::PromptModel<f64>;
pub type PromptModel32 = model::PromptModel<f32>;
pub type QwkMatrices64 = eval::QwkMatrices<f64>;
