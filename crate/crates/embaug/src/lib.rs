//! Embedding-space data augmentation toolkit.
//!
//! The pipeline: ingest labeled embeddings (JSONL), project them with LDA
//! into the discriminant space, build few-shot prompts from per-class
//! context sets, generate synthetic embeddings (deterministic mock or HTTP
//! LLM gateway) with outlier screening, train an MLP classifier on the
//! augmented set, and sweep the whole thing across low-shot experiment
//! grids. Side modules simulate distribution drift under a fixed decision
//! boundary and model the token-cost gap between image-mode and
//! embedding-text prompting.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64`/`*32` aliases below pin the common instantiations.

pub mod classifier;
pub mod cost;
pub mod drift;
pub mod error;
pub mod generation;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod projection;
pub mod prompting;
pub mod rng;
pub mod scalar;
pub mod store;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Dataset of `f64` embeddings (the default precision).
pub type Dataset64 = store::EmbeddingDataset<f64>;
/// Dataset of `f32` embeddings.
pub type Dataset32 = store::EmbeddingDataset<f32>;
/// LDA projection at `f64`.
pub type Projection64 = projection::ProjectionModel<f64>;
/// LDA projection at `f32`.
pub type Projection32 = projection::ProjectionModel<f32>;
/// MLP classifier at `f64`.
pub type Mlp64 = classifier::MlpModel<f64>;
/// MLP classifier at `f32`.
pub type Mlp32 = classifier::MlpModel<f32>;
/// Experiment result row at `f64`.
pub type ResultRow64 = harness::ResultRow<f64>;
/// Drift scenario at `f64`.
pub type DriftScenario64 = drift::DriftScenario<f64>;
