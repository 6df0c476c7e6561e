//! Offline-phase preparation: the tower universe heard across a dataset,
//! fixed-dimension feature vectors, and the seeded train/holdout split of
//! seed points.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{round_half_up, Asu, FeatureVector, Fingerprint, Scan, TowerId};

/// Fill value for universe towers a scan did not hear: the weakest
/// representable level, roughly -113 dBm. Storage formats still distinguish
/// an absent tower (omitted key) from one heard at level zero.
pub const NOT_HEARD: Asu = Asu::MIN;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("cannot build a tower universe: no towers heard in any scan")]
    EmptyUniverse,
    #[error("tower universe must be strictly increasing with no duplicates")]
    UnorderedUniverse,
    #[error("scan references tower {0} outside the universe")]
    UnknownTower(TowerId),
    #[error("need at least {needed} fingerprints, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("train fraction {0} must lie strictly between 0 and 1")]
    InvalidTrainFraction(f64),
}

/// The ordered set of every tower heard anywhere in a dataset.
///
/// Ordering is lexicographic on the tower id, which makes feature-vector
/// indices reproducible across runs and machines. The universe size is the
/// feature-vector dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerUniverse {
    towers: Vec<TowerId>,
}

impl TowerUniverse {
    /// Wrap an already-sorted tower list, rejecting empty, unsorted, or
    /// duplicated input.
    pub fn new(towers: Vec<TowerId>) -> Result<Self, PreprocessError> {
        if towers.is_empty() {
            return Err(PreprocessError::EmptyUniverse);
        }
        if !towers.windows(2).all(|w| w[0] < w[1]) {
            return Err(PreprocessError::UnorderedUniverse);
        }
        Ok(Self { towers })
    }

    pub fn towers(&self) -> &[TowerId] {
        &self.towers
    }

    pub fn iter(&self) -> impl Iterator<Item = &TowerId> {
        self.towers.iter()
    }

    pub fn len(&self) -> usize {
        self.towers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.towers.is_empty()
    }

    pub fn contains(&self, tower: &TowerId) -> bool {
        self.index_of(tower).is_some()
    }

    /// Feature index of a tower, if it is part of the universe.
    pub fn index_of(&self, tower: &TowerId) -> Option<usize> {
        self.towers.binary_search(tower).ok()
    }
}

/// How seed points are partitioned for interpolator validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub rng_seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            rng_seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(PreprocessError::InvalidTrainFraction(self.train_fraction));
        }
        Ok(())
    }
}

/// Sorted union of every tower id appearing in any scan.
///
/// Deterministic for a given input multiset regardless of list order.
pub fn build_tower_universe(
    fingerprints: &[Fingerprint],
) -> Result<TowerUniverse, PreprocessError> {
    let towers: BTreeSet<TowerId> = fingerprints
        .iter()
        .flat_map(|fp| fp.scan.readings().keys().cloned())
        .collect();
    if towers.is_empty() {
        return Err(PreprocessError::EmptyUniverse);
    }
    Ok(TowerUniverse {
        towers: towers.into_iter().collect(),
    })
}

/// Extend a scan to the full universe dimension, filling [`NOT_HEARD`] for
/// towers the scan missed.
pub fn vectorize(scan: &Scan, universe: &TowerUniverse) -> Result<FeatureVector, PreprocessError> {
    for tower in scan.readings().keys() {
        if !universe.contains(tower) {
            return Err(PreprocessError::UnknownTower(tower.clone()));
        }
    }
    let values = universe
        .iter()
        .map(|tower| scan.get(tower).unwrap_or(NOT_HEARD))
        .collect();
    Ok(FeatureVector::new(values))
}

/// Uniform random partition of seed points into train and holdout sides,
/// driven solely by the config seed.
///
/// The train side gets `round(train_fraction * n)` points, with at least
/// one point on each side. Relative input order is preserved within each
/// side.
pub fn split_seed_points(
    fingerprints: &[Fingerprint],
    cfg: &SplitConfig,
) -> Result<(Vec<Fingerprint>, Vec<Fingerprint>), PreprocessError> {
    cfg.validate()?;
    let n = fingerprints.len();
    if n < 2 {
        return Err(PreprocessError::InsufficientData { needed: 2, got: n });
    }
    let train_len = (round_half_up(cfg.train_fraction * n as f64) as usize).clamp(1, n - 1);

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    indices.shuffle(&mut rng);

    let (train_idx, holdout_idx) = indices.split_at(train_len);
    let mut train_idx = train_idx.to_vec();
    let mut holdout_idx = holdout_idx.to_vec();
    train_idx.sort_unstable();
    holdout_idx.sort_unstable();

    let pick = |idx: &[usize]| idx.iter().map(|&i| fingerprints[i].clone()).collect();
    Ok((pick(&train_idx), pick(&holdout_idx)))
}
