//! The spatial generator: k-nearest-neighbor regression over seed
//! fingerprints, holdout validation, model selection over k, and synthesis
//! of a dense radio map on a uniform grid.
//!
//! The regressor is a lazy learner: fitting retains the vectorized training
//! set, and each prediction averages the k spatially nearest seeds
//! per vector component. Predictions are quantized back into ASU levels
//! before they enter a radio map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    quantize_asu, round_half_up, Bounds, FeatureVector, Fingerprint, ModelError, Position,
    Provenance, RadioMap, RadioMapAnchor,
};
use crate::preprocess::{
    build_tower_universe, split_seed_points, vectorize, PreprocessError, SplitConfig,
    TowerUniverse,
};

#[derive(Debug, Error)]
pub enum DensifyError {
    #[error("k-NN regression with k={k} needs at least {k} training points, got {available}")]
    InsufficientNeighbors { k: usize, available: usize },
    #[error("holdout set is empty")]
    EmptyHoldout,
    #[error("no k in [{lo}, {hi}] is feasible for {train} training points")]
    NoFeasibleK { lo: usize, hi: usize, train: usize },
    #[error("bounds must enclose a positive area")]
    DegenerateBounds,
    #[error("invalid densify config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Neighbor weighting for the spatial regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    #[default]
    InverseDistance,
}

/// Spatial generator hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensifyConfig {
    /// Neighbor count of the fitted regressor.
    pub k: usize,
    pub weighting: Weighting,
    /// Distance guard in meters; a query this close to a training point is
    /// an exact hit under inverse-distance weighting.
    pub epsilon_m: f64,
    /// Synthetic anchor density target.
    pub target_density_per_m2: f64,
    /// Inclusive interval scanned by [`select_k`].
    pub k_search_range: (usize, usize),
}

impl Default for DensifyConfig {
    fn default() -> Self {
        Self {
            k: 3,
            weighting: Weighting::InverseDistance,
            epsilon_m: 1e-9,
            target_density_per_m2: 11.49,
            k_search_range: (1, 10),
        }
    }
}

impl DensifyConfig {
    pub fn validate(&self) -> Result<(), DensifyError> {
        if self.k < 1 {
            return Err(DensifyError::InvalidConfig("k must be at least 1".into()));
        }
        if !(self.epsilon_m > 0.0) || !self.epsilon_m.is_finite() {
            return Err(DensifyError::InvalidConfig(
                "epsilon_m must be a positive finite distance".into(),
            ));
        }
        if !(self.target_density_per_m2 > 0.0) || !self.target_density_per_m2.is_finite() {
            return Err(DensifyError::InvalidConfig(
                "target_density_per_m2 must be positive".into(),
            ));
        }
        let (lo, hi) = self.k_search_range;
        if lo < 1 || lo > hi {
            return Err(DensifyError::InvalidConfig(format!(
                "k_search_range [{lo}, {hi}] must be a non-empty interval starting at 1 or above"
            )));
        }
        Ok(())
    }
}

/// Holdout quality of a fitted interpolator, in ASU units.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rmse_overall: f64,
    pub rmse_per_tower: Vec<f64>,
    pub holdout_count: usize,
}

/// The fitted spatial generator: the retained training set plus its
/// hyperparameters. Immutable after fitting and safe to share across
/// threads.
#[derive(Debug, Clone)]
pub struct Interpolator {
    train_points: Vec<(Position, FeatureVector)>,
    universe: TowerUniverse,
    config: DensifyConfig,
}

impl Interpolator {
    /// Fit on vectorized training fingerprints. Requires at least `k`
    /// points; nothing beyond the inputs influences later predictions.
    pub fn fit(
        train: &[Fingerprint],
        universe: &TowerUniverse,
        cfg: &DensifyConfig,
    ) -> Result<Self, DensifyError> {
        cfg.validate()?;
        if train.len() < cfg.k {
            return Err(DensifyError::InsufficientNeighbors {
                k: cfg.k,
                available: train.len(),
            });
        }
        let train_points = train
            .iter()
            .map(|fp| Ok((fp.position, vectorize(&fp.scan, universe)?)))
            .collect::<Result<Vec<_>, PreprocessError>>()?;
        Ok(Self {
            train_points,
            universe: universe.clone(),
            config: cfg.clone(),
        })
    }

    pub fn train_points(&self) -> &[(Position, FeatureVector)] {
        &self.train_points
    }

    pub fn universe(&self) -> &TowerUniverse {
        &self.universe
    }

    pub fn config(&self) -> &DensifyConfig {
        &self.config
    }

    /// The k training points nearest to `at`, sorted by (distance, index).
    /// Ties on distance keep the lower training-set index.
    fn nearest_neighbors(&self, at: Position) -> Vec<(usize, f64)> {
        let mut by_distance: Vec<(usize, f64)> = self
            .train_points
            .iter()
            .enumerate()
            .map(|(i, (p, _))| (i, p.distance(at)))
            .collect();
        by_distance.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        by_distance.truncate(self.config.k);
        by_distance
    }

    /// Predict the continuous ASU-scale signature at a point: the
    /// per-component weighted mean over the k nearest training points.
    ///
    /// Under inverse-distance weighting a query within `epsilon_m` of a
    /// training point returns that point's vector verbatim (the nearest
    /// such point wins). Weights are `1 / max(d, epsilon_m)` otherwise.
    pub fn predict_rss(&self, at: Position) -> Vec<f64> {
        let neighbors = self.nearest_neighbors(at);
        let dim = self.universe.len();
        let mut acc = vec![0.0f64; dim];

        match self.config.weighting {
            Weighting::Uniform => {
                for &(idx, _) in &neighbors {
                    for (slot, &level) in acc.iter_mut().zip(self.train_points[idx].1.values()) {
                        *slot += f64::from(level.value());
                    }
                }
                let k = neighbors.len() as f64;
                acc.iter_mut().for_each(|v| *v /= k);
            }
            Weighting::InverseDistance => {
                if neighbors[0].1 <= self.config.epsilon_m {
                    return self.train_points[neighbors[0].0].1.to_continuous();
                }
                let mut weight_sum = 0.0;
                for &(idx, dist) in &neighbors {
                    let w = 1.0 / dist.max(self.config.epsilon_m);
                    weight_sum += w;
                    for (slot, &level) in acc.iter_mut().zip(self.train_points[idx].1.values()) {
                        *slot += w * f64::from(level.value());
                    }
                }
                acc.iter_mut().for_each(|v| *v /= weight_sum);
            }
        }
        acc
    }

    /// Compare quantized predictions against the true vectors of a holdout
    /// set: RMSE per tower and over all (point, tower) cells.
    pub fn validate(&self, holdout: &[Fingerprint]) -> Result<ValidationReport, DensifyError> {
        if holdout.is_empty() {
            return Err(DensifyError::EmptyHoldout);
        }
        let dim = self.universe.len();
        let mut sq_sums = vec![0.0f64; dim];
        for fp in holdout {
            let truth = vectorize(&fp.scan, &self.universe)?;
            let predicted = self.predict_rss(fp.position);
            for (tower, (&raw, &level)) in predicted.iter().zip(truth.values()).enumerate() {
                let err = f64::from(quantize_asu(raw)?.value()) - f64::from(level.value());
                sq_sums[tower] += err * err;
            }
        }
        let n = holdout.len() as f64;
        let rmse_per_tower: Vec<f64> = sq_sums.iter().map(|s| (s / n).sqrt()).collect();
        let rmse_overall = (sq_sums.iter().sum::<f64>() / (n * dim as f64)).sqrt();
        Ok(ValidationReport {
            rmse_overall,
            rmse_per_tower,
            holdout_count: holdout.len(),
        })
    }
}

/// Fit and validate for every feasible k in the config's search range and
/// return the k with the lowest overall RMSE, ties going to the smaller k.
///
/// Values of k exceeding the training-set size are skipped; an error is
/// returned only when the whole range is infeasible.
pub fn select_k(
    train: &[Fingerprint],
    holdout: &[Fingerprint],
    universe: &TowerUniverse,
    cfg: &DensifyConfig,
) -> Result<(usize, Vec<(usize, ValidationReport)>), DensifyError> {
    cfg.validate()?;
    let (lo, hi) = cfg.k_search_range;
    let mut per_k = Vec::new();
    for k in lo..=hi {
        if k > train.len() {
            continue;
        }
        let candidate = DensifyConfig {
            k,
            ..cfg.clone()
        };
        let model = Interpolator::fit(train, universe, &candidate)?;
        per_k.push((k, model.validate(holdout)?));
    }
    if per_k.is_empty() {
        return Err(DensifyError::NoFeasibleK {
            lo,
            hi,
            train: train.len(),
        });
    }
    Ok((pick_best_k(&per_k), per_k))
}

/// Minimum overall RMSE wins; on ties the smaller k does. `per_k` is
/// ascending in k, so keeping the first strict minimum implements the
/// tie-break.
fn pick_best_k(per_k: &[(usize, ValidationReport)]) -> usize {
    let mut best = &per_k[0];
    for candidate in &per_k[1..] {
        if candidate.1.rmse_overall < best.1.rmse_overall {
            best = candidate;
        }
    }
    best.0
}

/// Points per axis for a uniform grid hitting a density target:
/// `round(side * sqrt(density))` per side, at least 2.
pub fn grid_shape(bounds: &Bounds, target_density: f64) -> Result<(usize, usize), DensifyError> {
    if !(target_density > 0.0) || !target_density.is_finite() {
        return Err(DensifyError::InvalidConfig(
            "target density must be positive".into(),
        ));
    }
    if !bounds.is_valid() || bounds.area() <= 0.0 {
        return Err(DensifyError::DegenerateBounds);
    }
    let per_axis = |side: f64| (round_half_up(side * target_density.sqrt()) as usize).max(2);
    Ok((per_axis(bounds.width()), per_axis(bounds.height())))
}

/// Uniform axis-aligned grid of cell centers covering `bounds`.
///
/// Output order is row-major: y varies in the outer loop, x in the inner.
/// The achieved density lands within ten percent of the target for bounds
/// with sides of five meters or more.
pub fn generate_grid(bounds: &Bounds, target_density: f64) -> Result<Vec<Position>, DensifyError> {
    let (nx, ny) = grid_shape(bounds, target_density)?;
    let step_x = bounds.width() / nx as f64;
    let step_y = bounds.height() / ny as f64;
    let mut points = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            points.push(Position::new(
                bounds.min_x + (ix as f64 + 0.5) * step_x,
                bounds.min_y + (iy as f64 + 0.5) * step_y,
            ));
        }
    }
    Ok(points)
}

/// Survey grid: same per-axis counts as [`generate_grid`] but with points
/// at grid nodes, endpoints included, so the surveyed bounding box spans
/// the full bounds. Row-major order like the cell-center grid.
pub fn generate_survey_grid(
    bounds: &Bounds,
    target_density: f64,
) -> Result<Vec<Position>, DensifyError> {
    let (nx, ny) = grid_shape(bounds, target_density)?;
    let step_x = bounds.width() / (nx - 1) as f64;
    let step_y = bounds.height() / (ny - 1) as f64;
    let mut points = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            points.push(Position::new(
                bounds.min_x + ix as f64 * step_x,
                bounds.min_y + iy as f64 * step_y,
            ));
        }
    }
    Ok(points)
}

/// Everything the densification pass produces: the map, the holdout report
/// of the selected k, and the per-k selection trace.
#[derive(Debug, Clone)]
pub struct DensifyOutcome {
    pub map: RadioMap,
    pub validation: ValidationReport,
    pub best_k: usize,
    pub per_k: Vec<(usize, ValidationReport)>,
}

/// Full densification: split the seeds, select k on the holdout, refit on
/// all seeds with the winner, and synthesize quantized anchors at every
/// grid point inside the seeds' bounding box.
///
/// The configured `k` must itself be trainable on the split's training
/// side; model selection then explores the search range around it. The
/// output map holds every seed anchor followed by the synthetic grid
/// anchors in grid order.
pub fn densify_radio_map(
    seeds: &[Fingerprint],
    cfg: &DensifyConfig,
    split: &SplitConfig,
) -> Result<DensifyOutcome, DensifyError> {
    cfg.validate()?;
    let universe = build_tower_universe(seeds)?;
    let bounds = Bounds::from_positions(seeds.iter().map(|fp| fp.position))
        .ok_or(DensifyError::DegenerateBounds)?;

    let (train, holdout) = split_seed_points(seeds, split)?;
    if train.len() < cfg.k {
        return Err(DensifyError::InsufficientNeighbors {
            k: cfg.k,
            available: train.len(),
        });
    }
    let (best_k, per_k) = select_k(&train, &holdout, &universe, cfg)?;
    let validation = per_k
        .iter()
        .find(|(k, _)| *k == best_k)
        .expect("best_k comes from per_k")
        .1
        .clone();

    let final_cfg = DensifyConfig {
        k: best_k,
        ..cfg.clone()
    };
    let model = Interpolator::fit(seeds, &universe, &final_cfg)?;

    let mut anchors = Vec::with_capacity(seeds.len());
    for fp in seeds {
        anchors.push(RadioMapAnchor {
            position: fp.position,
            vector: vectorize(&fp.scan, &universe)?,
            provenance: Provenance::Seed,
        });
    }
    for at in generate_grid(&bounds, cfg.target_density_per_m2)? {
        anchors.push(RadioMapAnchor {
            position: at,
            vector: FeatureVector::from_continuous(&model.predict_rss(at))?,
            provenance: Provenance::Synthetic,
        });
    }

    let map = RadioMap::new(universe, anchors, bounds)?;
    Ok(DensifyOutcome {
        map,
        validation,
        best_k,
        per_k,
    })
}

/// The sparse baseline map: every seed vectorized as-is, no synthesis.
pub fn seed_radio_map(seeds: &[Fingerprint]) -> Result<RadioMap, DensifyError> {
    let universe = build_tower_universe(seeds)?;
    let bounds = Bounds::from_positions(seeds.iter().map(|fp| fp.position))
        .ok_or(DensifyError::DegenerateBounds)?;
    let anchors = seeds
        .iter()
        .map(|fp| {
            Ok(RadioMapAnchor {
                position: fp.position,
                vector: vectorize(&fp.scan, &universe)?,
                provenance: Provenance::Seed,
            })
        })
        .collect::<Result<Vec<_>, PreprocessError>>()?;
    Ok(RadioMap::new(universe, anchors, bounds)?)
}
