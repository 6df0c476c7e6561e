//! Cellular radio-map densification and fingerprint localization.
//!
//! The offline phase turns a handful of surveyed seed fingerprints into a
//! dense radio map by spatial k-nearest-neighbor regression; the online
//! phase estimates positions from a scan against that map with either a
//! deterministic signal-space k-NN matcher or a probabilistic
//! maximum-likelihood engine. A log-distance path-loss simulator provides
//! synthetic ground truth, and the [`eval`] module computes the density,
//! coverage, and accuracy metrics used to judge a run.
//!
//! Everything is deterministic: all randomness flows through explicit
//! 64-bit seeds, and repeated runs produce bit-identical results.

pub mod densify;
pub mod eval;
pub mod format;
pub mod localize;
pub mod model;
pub mod preprocess;
pub mod simulate;

pub use model::{
    Asu, Bounds, FeatureVector, Fingerprint, ModelError, Position, Provenance, RadioMap,
    RadioMapAnchor, Scan, TowerId,
};
pub use preprocess::TowerUniverse;
