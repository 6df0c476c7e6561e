//! Synthetic ground truth: a log-distance path-loss field with frozen
//! per-cell shadowing, and noisy fingerprint sampling on top of it.
//!
//! Shadowing is drawn once per (tower, 1 m grid cell) when the environment
//! is created and never redrawn, so the field is a static function of
//! position the way a real building's shadowing is. Measurement noise is
//! the only per-sample randomness.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::densify::{generate_survey_grid, DensifyError};
use crate::model::{
    asu_from_dbm, Bounds, Fingerprint, ModelError, Position, Scan, TowerId, MAX_SCAN_TOWERS,
};

/// Path-loss reference distance, meters.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("invalid environment spec: {0}")]
    InvalidSpec(String),
    #[error("unknown tower {0}")]
    UnknownTower(TowerId),
    #[error("position ({x}, {y}) lies outside the environment bounds")]
    OutOfBounds { x: f64, y: f64 },
    #[error(transparent)]
    Densify(#[from] DensifyError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parameters of a synthetic RF environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvironmentSpec {
    pub bounds: Bounds,
    pub tower_count: usize,
    /// Transmit power at the 1 m reference distance.
    pub tx_power_dbm: f64,
    pub path_loss_exponent: f64,
    /// Std-dev of the static per-cell shadowing offsets, dB.
    pub shadowing_sigma_db: f64,
    /// Std-dev of per-measurement noise, dB.
    pub noise_sigma_db: f64,
    pub rng_seed: u64,
}

/// Defaults model macro towers received indoors: a -65 dBm reference power
/// and a cluttered-propagation exponent of 3.5 put the sensitivity
/// boundary inside the area, so which towers are hearable varies by
/// position the way it does in a real deployment. A hotter reference
/// power saturates every tower everywhere and turns the seven-strongest
/// cut into a noise-driven coin flip.
impl Default for EnvironmentSpec {
    fn default() -> Self {
        Self {
            bounds: Bounds {
                min_x: 0.0,
                min_y: 0.0,
                max_x: 16.0,
                max_y: 16.0,
            },
            tower_count: 10,
            tx_power_dbm: -65.0,
            path_loss_exponent: 3.5,
            shadowing_sigma_db: 4.0,
            noise_sigma_db: 2.0,
            rng_seed: 0,
        }
    }
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<(), SimulateError> {
        if !self.bounds.is_valid() || self.bounds.area() <= 0.0 {
            return Err(SimulateError::InvalidSpec(
                "bounds must enclose a positive area".into(),
            ));
        }
        if self.tower_count < 1 {
            return Err(SimulateError::InvalidSpec(
                "tower_count must be at least 1".into(),
            ));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(SimulateError::InvalidSpec("tx_power_dbm must be finite".into()));
        }
        if !(self.path_loss_exponent > 0.0) || !self.path_loss_exponent.is_finite() {
            return Err(SimulateError::InvalidSpec(
                "path_loss_exponent must be positive".into(),
            ));
        }
        for (name, sigma) in [
            ("shadowing_sigma_db", self.shadowing_sigma_db),
            ("noise_sigma_db", self.noise_sigma_db),
        ] {
            if !(sigma >= 0.0) || !sigma.is_finite() {
                return Err(SimulateError::InvalidSpec(format!(
                    "{name} must be non-negative and finite"
                )));
            }
        }
        Ok(())
    }
}

/// Static shadowing offsets on a 1 m grid, one layer per tower.
#[derive(Debug, Clone)]
struct ShadowField {
    cells_x: usize,
    cells_y: usize,
    /// offsets[tower][cell_y * cells_x + cell_x], dB
    offsets: Vec<Vec<f64>>,
}

impl ShadowField {
    fn generate(spec: &EnvironmentSpec, rng: &mut ChaCha8Rng) -> Self {
        let cells_x = (spec.bounds.width().ceil() as usize).max(1);
        let cells_y = (spec.bounds.height().ceil() as usize).max(1);
        let cells = cells_x * cells_y;
        let offsets = if spec.shadowing_sigma_db > 0.0 {
            let normal = Normal::new(0.0, spec.shadowing_sigma_db).expect("validated sigma");
            (0..spec.tower_count)
                .map(|_| (0..cells).map(|_| normal.sample(rng)).collect())
                .collect()
        } else {
            vec![vec![0.0; cells]; spec.tower_count]
        };
        Self {
            cells_x,
            cells_y,
            offsets,
        }
    }

    fn offset(&self, tower_index: usize, bounds: &Bounds, at: Position) -> f64 {
        let clamp = |v: f64, n: usize| (v.floor() as isize).clamp(0, n as isize - 1) as usize;
        let ix = clamp(at.x - bounds.min_x, self.cells_x);
        let iy = clamp(at.y - bounds.min_y, self.cells_y);
        self.offsets[tower_index][iy * self.cells_x + ix]
    }
}

/// A realized environment: tower placements plus the frozen shadow field.
/// Regenerating from the same spec reproduces it exactly.
#[derive(Debug, Clone)]
pub struct Environment {
    spec: EnvironmentSpec,
    towers: Vec<(TowerId, Position)>,
    shadow: ShadowField,
}

impl Environment {
    /// Place towers uniformly at random inside the bounds and freeze the
    /// shadow field, all from the spec's seed.
    pub fn generate(spec: EnvironmentSpec) -> Result<Self, SimulateError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        let digits = spec.tower_count.to_string().len().max(2);
        let towers = (0..spec.tower_count)
            .map(|i| {
                let x = rng.random_range(spec.bounds.min_x..=spec.bounds.max_x);
                let y = rng.random_range(spec.bounds.min_y..=spec.bounds.max_y);
                let id = TowerId::new(format!("T{:0width$}", i + 1, width = digits))
                    .expect("generated ids are non-empty");
                (id, Position::new(x, y))
            })
            .collect();
        let shadow = ShadowField::generate(&spec, &mut rng);
        Ok(Self {
            spec,
            towers,
            shadow,
        })
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    pub fn towers(&self) -> &[(TowerId, Position)] {
        &self.towers
    }

    fn tower_index(&self, tower: &TowerId) -> Option<usize> {
        self.towers.iter().position(|(id, _)| id == tower)
    }

    /// Noise-free field value: log-distance path loss plus the frozen
    /// shadowing offset of the position's cell.
    pub fn true_rss(&self, at: Position, tower: &TowerId) -> Result<f64, SimulateError> {
        let index = self
            .tower_index(tower)
            .ok_or_else(|| SimulateError::UnknownTower(tower.clone()))?;
        let distance = self.towers[index].1.distance(at).max(REFERENCE_DISTANCE_M);
        let path_loss =
            10.0 * self.spec.path_loss_exponent * (distance / REFERENCE_DISTANCE_M).log10();
        Ok(self.spec.tx_power_dbm - path_loss + self.shadow.offset(index, &self.spec.bounds, at))
    }

    /// One noisy measurement of a tower at a position, dBm.
    pub fn measured_rss(
        &self,
        at: Position,
        tower: &TowerId,
        rng: &mut impl Rng,
    ) -> Result<f64, SimulateError> {
        let mut rss = self.true_rss(at, tower)?;
        if self.spec.noise_sigma_db > 0.0 {
            rss += Normal::new(0.0, self.spec.noise_sigma_db)
                .expect("validated sigma")
                .sample(rng);
        }
        Ok(rss)
    }

    /// Sample one scan at a position: measure every tower, keep the seven
    /// strongest post-noise, and drop anything quantizing to ASU 0 (below
    /// receiver sensitivity).
    pub fn sample_fingerprint(
        &self,
        at: Position,
        rng: &mut impl Rng,
    ) -> Result<Fingerprint, SimulateError> {
        if !self.spec.bounds.contains(at) {
            return Err(SimulateError::OutOfBounds { x: at.x, y: at.y });
        }
        let mut measured: Vec<(usize, f64)> = Vec::with_capacity(self.towers.len());
        for (index, (tower, _)) in self.towers.iter().enumerate() {
            measured.push((index, self.measured_rss(at, tower, rng)?));
        }
        // strongest first; equal strengths keep tower order
        measured.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

        let mut readings = BTreeMap::new();
        for &(index, dbm) in measured.iter().take(MAX_SCAN_TOWERS) {
            let asu = asu_from_dbm(dbm)?;
            if asu.value() > 0 {
                readings.insert(self.towers[index].0.clone(), asu);
            }
        }
        Ok(Fingerprint {
            position: at,
            scan: Scan::new(readings)?,
        })
    }

    /// Survey pass: one fingerprint per point of a uniform grid at the
    /// requested seed density. The grid includes the area edges, so the
    /// surveyed bounding box covers the whole environment.
    pub fn sample_seed_set(
        &self,
        seed_density: f64,
        rng: &mut impl Rng,
    ) -> Result<Vec<Fingerprint>, SimulateError> {
        generate_survey_grid(&self.spec.bounds, seed_density)?
            .into_iter()
            .map(|at| self.sample_fingerprint(at, rng))
            .collect()
    }

    /// Fingerprints at uniformly random positions, e.g. online-phase test
    /// scans with known ground truth.
    pub fn sample_scatter(
        &self,
        count: usize,
        rng: &mut impl Rng,
    ) -> Result<Vec<Fingerprint>, SimulateError> {
        (0..count)
            .map(|_| {
                let x = rng.random_range(self.spec.bounds.min_x..=self.spec.bounds.max_x);
                let y = rng.random_range(self.spec.bounds.min_y..=self.spec.bounds.max_y);
                self.sample_fingerprint(Position::new(x, y), rng)
            })
            .collect()
    }
}
