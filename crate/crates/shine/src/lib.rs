//! SHINE: signed heterogeneous information network embedding.
//!
//! Learns low-dimensional user embeddings from a signed sentiment network plus
//! optional social and profile side networks with three jointly trained
//! weighted deep autoencoders, and uses them for link sign prediction and
//! liked/disliked node recommendation. Also includes the upstream entity-level
//! sentiment-extraction stage that turns weakly labeled text into signed edges.

pub mod autoencoder;
pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod rng;
pub mod sentiext;
pub mod synth;

pub use error::{Result, ShineError};
