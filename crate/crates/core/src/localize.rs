//! Online-phase engines: deterministic signal-space k-NN matching against
//! the radio map, and a probabilistic maximum-likelihood engine over
//! per-location Gaussians.
//!
//! Both engines are pure functions of their inputs. Ties anywhere break
//! toward the lowest index, so identical inputs always give identical
//! outputs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Asu, Position, Provenance, RadioMap, Scan};
use crate::preprocess::{vectorize, PreprocessError, TowerUniverse};

#[derive(Debug, Error)]
pub enum LocalizeError {
    #[error("radio map holds no anchors")]
    EmptyMap,
    #[error("probabilistic model has no location bins; the map has no seed anchors to bin around")]
    NoSeedAnchors,
    #[error("probabilistic model must hold at least one location")]
    EmptyModel,
    #[error("location {index} has {got} per-tower entries, the universe lists {expected}")]
    LocationDimension {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("location {index} has a non-positive variance")]
    NonPositiveVariance { index: usize },
    #[error("invalid localize config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
}

/// Weighting of matched anchors in signal space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalWeighting {
    #[default]
    Uniform,
    InverseSignalDistance,
}

/// Online-engine hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizeConfig {
    /// Anchors matched by the deterministic engine.
    pub k_match: usize,
    pub weighting: SignalWeighting,
    /// Lower clamp for per-(location, tower) variances, ASU squared.
    pub variance_floor_asu2: f64,
    /// Radius pooling anchors into the probabilistic model's location bins.
    /// `None` derives the densified grid spacing from the map; zero makes
    /// every anchor its own bin.
    pub smoothing_radius_m: Option<f64>,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        Self {
            k_match: 3,
            weighting: SignalWeighting::Uniform,
            variance_floor_asu2: 1.0,
            smoothing_radius_m: None,
        }
    }
}

impl LocalizeConfig {
    pub fn validate(&self) -> Result<(), LocalizeError> {
        if self.k_match < 1 {
            return Err(LocalizeError::InvalidConfig(
                "k_match must be at least 1".into(),
            ));
        }
        if !(self.variance_floor_asu2 > 0.0) || !self.variance_floor_asu2.is_finite() {
            return Err(LocalizeError::InvalidConfig(
                "variance_floor_asu2 must be positive".into(),
            ));
        }
        if let Some(radius) = self.smoothing_radius_m {
            if !(radius >= 0.0) || !radius.is_finite() {
                return Err(LocalizeError::InvalidConfig(
                    "smoothing_radius_m must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Which engine produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Knn,
    Probabilistic,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Knn => "knn",
            Engine::Probabilistic => "probabilistic",
        })
    }
}

/// A position estimate with its engine-specific score: mean signal
/// distance for the k-NN engine, winning log-likelihood for the
/// probabilistic one.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationEstimate {
    pub position: Position,
    pub score: f64,
    pub engine: Engine,
}

/// One location bin of the probabilistic model: per-tower Gaussian
/// parameters at a candidate position.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbLocation {
    pub position: Position,
    /// Per-tower sample means, ASU scale.
    pub means: Vec<f64>,
    /// Per-tower population variances clamped to the floor, ASU squared.
    pub variances: Vec<f64>,
}

/// Per-location signal distributions fitted from a radio map.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbModel {
    locations: Vec<ProbLocation>,
    universe: TowerUniverse,
}

impl ProbModel {
    pub fn new(
        locations: Vec<ProbLocation>,
        universe: TowerUniverse,
    ) -> Result<Self, LocalizeError> {
        if locations.is_empty() {
            return Err(LocalizeError::EmptyModel);
        }
        for (index, location) in locations.iter().enumerate() {
            if location.means.len() != universe.len() || location.variances.len() != universe.len()
            {
                return Err(LocalizeError::LocationDimension {
                    index,
                    got: location.means.len().max(location.variances.len()),
                    expected: universe.len(),
                });
            }
            if location.variances.iter().any(|&v| !(v > 0.0)) {
                return Err(LocalizeError::NonPositiveVariance { index });
            }
        }
        Ok(Self {
            locations,
            universe,
        })
    }

    pub fn locations(&self) -> &[ProbLocation] {
        &self.locations
    }

    pub fn universe(&self) -> &TowerUniverse {
        &self.universe
    }
}

fn signal_distance(query: &[f64], anchor: &[Asu]) -> f64 {
    query
        .iter()
        .zip(anchor)
        .map(|(&q, &a)| {
            let d = q - f64::from(a.value());
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Deterministic engine: match the scan against every anchor signature in
/// ASU space and return the weighted centroid of the k nearest.
///
/// Ties on signal distance keep the lower anchor index. Under
/// inverse-signal-distance weighting an exact signature match returns that
/// anchor's position outright.
pub fn knn_locate(
    map: &RadioMap,
    scan: &Scan,
    cfg: &LocalizeConfig,
) -> Result<LocalizationEstimate, LocalizeError> {
    cfg.validate()?;
    if map.is_empty() {
        return Err(LocalizeError::EmptyMap);
    }
    let query = vectorize(scan, map.universe())?.to_continuous();

    let mut by_distance: Vec<(usize, f64)> = map
        .anchors()
        .iter()
        .enumerate()
        .map(|(i, anchor)| (i, signal_distance(&query, anchor.vector.values())))
        .collect();
    by_distance.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let selected = &by_distance[..cfg.k_match.min(by_distance.len())];

    let score = selected.iter().map(|&(_, d)| d).sum::<f64>() / selected.len() as f64;
    let position = match cfg.weighting {
        SignalWeighting::Uniform => {
            let (mut x, mut y) = (0.0, 0.0);
            for &(index, _) in selected {
                let p = map.anchors()[index].position;
                x += p.x;
                y += p.y;
            }
            Position::new(x / selected.len() as f64, y / selected.len() as f64)
        }
        SignalWeighting::InverseSignalDistance => {
            if selected[0].1 <= 0.0 {
                map.anchors()[selected[0].0].position
            } else {
                let (mut x, mut y, mut weight_sum) = (0.0, 0.0, 0.0);
                for &(index, distance) in selected {
                    let w = 1.0 / distance.max(1e-9);
                    let p = map.anchors()[index].position;
                    x += w * p.x;
                    y += w * p.y;
                    weight_sum += w;
                }
                Position::new(x / weight_sum, y / weight_sum)
            }
        }
    };

    Ok(LocalizationEstimate {
        position,
        score,
        engine: Engine::Knn,
    })
}

/// Grid spacing implied by a map's synthetic anchors: `sqrt(area / count)`.
/// Zero when the map has no synthetic anchors, which makes every anchor its
/// own bin.
pub fn derived_smoothing_radius(map: &RadioMap) -> f64 {
    let synthetic = map
        .anchors()
        .iter()
        .filter(|a| a.provenance == Provenance::Synthetic)
        .count();
    let area = map.bounds().area();
    if synthetic == 0 || area <= 0.0 {
        0.0
    } else {
        (area / synthetic as f64).sqrt()
    }
}

/// Fit per-location Gaussians from a radio map.
///
/// With a positive smoothing radius, every seed-provenance anchor opens a
/// bin that pools all anchors within the radius; with radius zero each
/// anchor is its own bin. Per bin and tower the sample mean and population
/// variance are taken, variances clamped up to the floor.
pub fn fit_probabilistic(map: &RadioMap, cfg: &LocalizeConfig) -> Result<ProbModel, LocalizeError> {
    cfg.validate()?;
    if map.is_empty() {
        return Err(LocalizeError::EmptyMap);
    }
    let radius = cfg
        .smoothing_radius_m
        .unwrap_or_else(|| derived_smoothing_radius(map));
    let dim = map.universe().len();

    let bin_stats = |members: &[usize]| {
        let mut means = vec![0.0f64; dim];
        for &index in members {
            for (slot, &level) in means.iter_mut().zip(map.anchors()[index].vector.values()) {
                *slot += f64::from(level.value());
            }
        }
        let count = members.len() as f64;
        means.iter_mut().for_each(|m| *m /= count);

        let mut variances = vec![0.0f64; dim];
        for &index in members {
            for ((slot, mean), &level) in variances
                .iter_mut()
                .zip(&means)
                .zip(map.anchors()[index].vector.values())
            {
                let d = f64::from(level.value()) - mean;
                *slot += d * d;
            }
        }
        variances
            .iter_mut()
            .for_each(|v| *v = (*v / count).max(cfg.variance_floor_asu2));
        (means, variances)
    };

    let locations: Vec<ProbLocation> = if radius <= 0.0 {
        map.anchors()
            .iter()
            .enumerate()
            .map(|(index, anchor)| {
                let (means, variances) = bin_stats(&[index]);
                ProbLocation {
                    position: anchor.position,
                    means,
                    variances,
                }
            })
            .collect()
    } else {
        map.anchors()
            .iter()
            .filter(|anchor| anchor.provenance == Provenance::Seed)
            .map(|center| {
                let members: Vec<usize> = map
                    .anchors()
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.position.distance(center.position) <= radius)
                    .map(|(index, _)| index)
                    .collect();
                let (means, variances) = bin_stats(&members);
                ProbLocation {
                    position: center.position,
                    means,
                    variances,
                }
            })
            .collect()
    };

    if locations.is_empty() {
        return Err(LocalizeError::NoSeedAnchors);
    }
    ProbModel::new(locations, map.universe().clone())
}

/// Probabilistic engine: the location whose Gaussian model maximizes the
/// scan's log-likelihood, summed over every universe tower with unheard
/// towers contributing level 0. Ties keep the lower location index.
pub fn ml_locate(model: &ProbModel, scan: &Scan) -> Result<LocalizationEstimate, LocalizeError> {
    let query = vectorize(scan, &model.universe)?.to_continuous();
    let mut best_index = 0usize;
    let mut best_ll = f64::NEG_INFINITY;
    for (index, location) in model.locations.iter().enumerate() {
        let ll = log_likelihood(&query, location);
        if ll > best_ll {
            best_index = index;
            best_ll = ll;
        }
    }
    Ok(LocalizationEstimate {
        position: model.locations[best_index].position,
        score: best_ll,
        engine: Engine::Probabilistic,
    })
}

fn log_likelihood(query: &[f64], location: &ProbLocation) -> f64 {
    let ln_2pi = std::f64::consts::TAU.ln();
    query
        .iter()
        .zip(&location.means)
        .zip(&location.variances)
        .map(|((&value, &mean), &variance)| {
            let d = value - mean;
            -0.5 * (ln_2pi + variance.ln() + d * d / variance)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bounds, FeatureVector, RadioMapAnchor, TowerId};

    fn tid(s: &str) -> TowerId {
        TowerId::new(s).unwrap()
    }

    fn asu(v: u8) -> Asu {
        Asu::new(v).unwrap()
    }

    fn anchor(x: f64, y: f64, levels: &[u8], provenance: Provenance) -> RadioMapAnchor {
        RadioMapAnchor {
            position: Position::new(x, y),
            vector: FeatureVector::new(levels.iter().map(|&v| asu(v)).collect()),
            provenance,
        }
    }

    /// Two anchors at (0,0) and (10,0) with opposing signatures.
    fn two_anchor_map() -> RadioMap {
        let universe = TowerUniverse::new(vec![tid("T1"), tid("T2")]).unwrap();
        let bounds = Bounds::new(0.0, 0.0, 10.0, 1.0).unwrap();
        RadioMap::new(
            universe,
            vec![
                anchor(0.0, 0.0, &[31, 0], Provenance::Seed),
                anchor(10.0, 0.0, &[0, 31], Provenance::Seed),
            ],
            bounds,
        )
        .unwrap()
    }

    fn scan(readings: &[(&str, u8)]) -> Scan {
        Scan::from_pairs(readings.iter().map(|&(t, v)| (tid(t), asu(v)))).unwrap()
    }

    #[test]
    fn knn_exact_match_single_neighbor() {
        let map = two_anchor_map();
        let cfg = LocalizeConfig {
            k_match: 1,
            ..LocalizeConfig::default()
        };
        let estimate = knn_locate(&map, &scan(&[("T1", 31)]), &cfg).unwrap();
        assert_eq!(estimate.position, Position::new(0.0, 0.0));
        assert_eq!(estimate.score, 0.0);
        assert_eq!(estimate.engine, Engine::Knn);
    }

    #[test]
    fn knn_uniform_centroid_of_two() {
        let map = two_anchor_map();
        let cfg = LocalizeConfig {
            k_match: 2,
            ..LocalizeConfig::default()
        };
        let estimate = knn_locate(&map, &scan(&[("T1", 31)]), &cfg).unwrap();
        assert_eq!(estimate.position, Position::new(5.0, 0.0));
    }

    #[test]
    fn knn_equidistant_signatures_centroid() {
        let map = two_anchor_map();
        let cfg = LocalizeConfig {
            k_match: 2,
            ..LocalizeConfig::default()
        };
        // distances to both anchors are sqrt(481)
        let estimate = knn_locate(&map, &scan(&[("T1", 15), ("T2", 15)]), &cfg).unwrap();
        assert_eq!(estimate.position, Position::new(5.0, 0.0));
        assert!((estimate.score - 481.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn knn_inverse_signal_distance_weighting() {
        let map = two_anchor_map();
        let cfg = LocalizeConfig {
            k_match: 2,
            weighting: SignalWeighting::InverseSignalDistance,
            ..LocalizeConfig::default()
        };
        // signature equals anchor 0 exactly: snap to it
        let estimate = knn_locate(&map, &scan(&[("T1", 31)]), &cfg).unwrap();
        assert_eq!(estimate.position, Position::new(0.0, 0.0));

        // closer (in signal space) to anchor 1: pulled toward (10, 0)
        let estimate = knn_locate(&map, &scan(&[("T2", 29)]), &cfg).unwrap();
        assert!(estimate.position.x > 5.0);
    }

    #[test]
    fn knn_full_k_uniform_returns_global_centroid() {
        let map = two_anchor_map();
        let cfg = LocalizeConfig {
            k_match: 2,
            ..LocalizeConfig::default()
        };
        for probe in [&[("T1", 31u8)][..], &[("T2", 4)], &[("T1", 9), ("T2", 17)]] {
            let estimate = knn_locate(&map, &scan(probe), &cfg).unwrap();
            assert_eq!(estimate.position, Position::new(5.0, 0.0));
        }
    }

    #[test]
    fn knn_unknown_tower_rejected() {
        let map = two_anchor_map();
        assert!(matches!(
            knn_locate(&map, &scan(&[("T9", 3)]), &LocalizeConfig::default()),
            Err(LocalizeError::Preprocess(PreprocessError::UnknownTower(_)))
        ));
    }

    #[test]
    fn knn_empty_map_rejected() {
        let universe = TowerUniverse::new(vec![tid("T1")]).unwrap();
        let bounds = Bounds::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let map = RadioMap::new(universe, vec![], bounds).unwrap();
        assert!(matches!(
            knn_locate(&map, &scan(&[("T1", 5)]), &LocalizeConfig::default()),
            Err(LocalizeError::EmptyMap)
        ));
    }

    #[test]
    fn probabilistic_single_anchor_floors_variance() {
        let universe = TowerUniverse::new(vec![tid("T1"), tid("T2")]).unwrap();
        let bounds = Bounds::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let map = RadioMap::new(
            universe,
            vec![anchor(0.0, 0.0, &[10, 0], Provenance::Seed)],
            bounds,
        )
        .unwrap();
        let cfg = LocalizeConfig {
            smoothing_radius_m: Some(0.0),
            ..LocalizeConfig::default()
        };
        let model = fit_probabilistic(&map, &cfg).unwrap();
        assert_eq!(model.locations().len(), 1);
        assert_eq!(model.locations()[0].means, vec![10.0, 0.0]);
        assert_eq!(model.locations()[0].variances, vec![1.0, 1.0]);
    }

    #[test]
    fn probabilistic_bin_pools_population_variance() {
        // seed at origin pools the synthetic anchor 1 m away: levels 10, 14
        let universe = TowerUniverse::new(vec![tid("T1")]).unwrap();
        let bounds = Bounds::new(0.0, 0.0, 10.0, 1.0).unwrap();
        let map = RadioMap::new(
            universe,
            vec![
                anchor(0.0, 0.0, &[10], Provenance::Seed),
                anchor(1.0, 0.0, &[14], Provenance::Synthetic),
            ],
            bounds,
        )
        .unwrap();
        let cfg = LocalizeConfig {
            smoothing_radius_m: Some(2.0),
            ..LocalizeConfig::default()
        };
        let model = fit_probabilistic(&map, &cfg).unwrap();
        assert_eq!(model.locations().len(), 1);
        assert_eq!(model.locations()[0].means, vec![12.0]);
        assert_eq!(model.locations()[0].variances, vec![4.0]);
    }

    #[test]
    fn probabilistic_radius_zero_bins_every_anchor() {
        let map = two_anchor_map();
        let cfg = LocalizeConfig {
            smoothing_radius_m: Some(0.0),
            ..LocalizeConfig::default()
        };
        let model = fit_probabilistic(&map, &cfg).unwrap();
        assert_eq!(model.locations().len(), 2);
    }

    #[test]
    fn probabilistic_needs_seed_anchors_for_pooling() {
        let universe = TowerUniverse::new(vec![tid("T1")]).unwrap();
        let bounds = Bounds::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let map = RadioMap::new(
            universe,
            vec![anchor(0.5, 0.5, &[9], Provenance::Synthetic)],
            bounds,
        )
        .unwrap();
        let cfg = LocalizeConfig {
            smoothing_radius_m: Some(1.0),
            ..LocalizeConfig::default()
        };
        assert!(matches!(
            fit_probabilistic(&map, &cfg),
            Err(LocalizeError::NoSeedAnchors)
        ));
    }

    #[test]
    fn ml_single_location_always_wins() {
        let universe = TowerUniverse::new(vec![tid("T1")]).unwrap();
        let model = ProbModel::new(
            vec![ProbLocation {
                position: Position::new(3.0, 4.0),
                means: vec![20.0],
                variances: vec![1.0],
            }],
            universe,
        )
        .unwrap();
        for level in [0u8, 5, 31] {
            let estimate = ml_locate(&model, &scan(&[("T1", level)])).unwrap();
            assert_eq!(estimate.position, Position::new(3.0, 4.0));
            assert_eq!(estimate.engine, Engine::Probabilistic);
        }
    }

    #[test]
    fn ml_own_mean_maximizes_likelihood() {
        let universe = TowerUniverse::new(vec![tid("T1"), tid("T2")]).unwrap();
        let model = ProbModel::new(
            vec![
                ProbLocation {
                    position: Position::new(0.0, 0.0),
                    means: vec![10.0, 20.0],
                    variances: vec![2.0, 2.0],
                },
                ProbLocation {
                    position: Position::new(9.0, 0.0),
                    means: vec![25.0, 5.0],
                    variances: vec![2.0, 2.0],
                },
            ],
            universe,
        )
        .unwrap();
        let estimate = ml_locate(&model, &scan(&[("T1", 10), ("T2", 20)])).unwrap();
        assert_eq!(estimate.position, Position::new(0.0, 0.0));
    }

    #[test]
    fn ml_ties_keep_the_lower_index() {
        let universe = TowerUniverse::new(vec![tid("T1")]).unwrap();
        let duplicate = ProbLocation {
            position: Position::new(1.0, 1.0),
            means: vec![15.0],
            variances: vec![1.5],
        };
        let model = ProbModel::new(
            vec![
                duplicate.clone(),
                ProbLocation {
                    position: Position::new(8.0, 8.0),
                    ..duplicate.clone()
                },
            ],
            universe,
        )
        .unwrap();
        let estimate = ml_locate(&model, &scan(&[("T1", 15)])).unwrap();
        assert_eq!(estimate.position, Position::new(1.0, 1.0));
    }

    #[test]
    fn ml_unknown_tower_rejected() {
        let universe = TowerUniverse::new(vec![tid("T1")]).unwrap();
        let model = ProbModel::new(
            vec![ProbLocation {
                position: Position::new(0.0, 0.0),
                means: vec![10.0],
                variances: vec![1.0],
            }],
            universe,
        )
        .unwrap();
        assert!(ml_locate(&model, &scan(&[("T7", 1)])).is_err());
    }

    #[test]
    fn prob_model_validates_shape() {
        let universe = TowerUniverse::new(vec![tid("T1"), tid("T2")]).unwrap();
        assert!(matches!(
            ProbModel::new(vec![], universe.clone()),
            Err(LocalizeError::EmptyModel)
        ));
        let short = ProbLocation {
            position: Position::new(0.0, 0.0),
            means: vec![1.0],
            variances: vec![1.0],
        };
        assert!(matches!(
            ProbModel::new(vec![short], universe.clone()),
            Err(LocalizeError::LocationDimension { index: 0, .. })
        ));
        let bad_variance = ProbLocation {
            position: Position::new(0.0, 0.0),
            means: vec![1.0, 2.0],
            variances: vec![1.0, 0.0],
        };
        assert!(matches!(
            ProbModel::new(vec![bad_variance], universe),
            Err(LocalizeError::NonPositiveVariance { index: 0 })
        ));
    }

    #[test]
    fn consistent_tower_relabeling_leaves_engines_unchanged() {
        // same geometry under reversed universe order ("A*" vs "Z*" names)
        let bounds = Bounds::new(0.0, 0.0, 10.0, 1.0).unwrap();
        let build = |names: [&str; 2], flip: bool| {
            let mut towers = vec![tid(names[0]), tid(names[1])];
            towers.sort();
            let universe = TowerUniverse::new(towers).unwrap();
            let vec_of = |a: u8, b: u8| {
                if flip {
                    vec![asu(b), asu(a)]
                } else {
                    vec![asu(a), asu(b)]
                }
            };
            RadioMap::new(
                universe,
                vec![
                    RadioMapAnchor {
                        position: Position::new(0.0, 0.0),
                        vector: FeatureVector::new(vec_of(31, 2)),
                        provenance: Provenance::Seed,
                    },
                    RadioMapAnchor {
                        position: Position::new(10.0, 0.0),
                        vector: FeatureVector::new(vec_of(3, 28)),
                        provenance: Provenance::Seed,
                    },
                ],
                bounds,
            )
            .unwrap()
        };
        // "Aa" < "Ab" keeps order; "Zb" > "Za" reverses it
        let original = build(["Aa", "Ab"], false);
        let relabeled = build(["Zb", "Za"], true);

        let cfg = LocalizeConfig {
            k_match: 2,
            ..LocalizeConfig::default()
        };
        let query_original = scan(&[("Aa", 25), ("Ab", 6)]);
        let query_relabeled = scan(&[("Zb", 25), ("Za", 6)]);

        let a = knn_locate(&original, &query_original, &cfg).unwrap();
        let b = knn_locate(&relabeled, &query_relabeled, &cfg).unwrap();
        assert_eq!(a.position, b.position);
        assert_eq!(a.score, b.score);

        let zero_radius = LocalizeConfig {
            smoothing_radius_m: Some(0.0),
            ..cfg
        };
        let ma = fit_probabilistic(&original, &zero_radius).unwrap();
        let mb = fit_probabilistic(&relabeled, &zero_radius).unwrap();
        let ea = ml_locate(&ma, &query_original).unwrap();
        let eb = ml_locate(&mb, &query_relabeled).unwrap();
        assert_eq!(ea.position, eb.position);
        assert!((ea.score - eb.score).abs() < 1e-12);
    }
}
