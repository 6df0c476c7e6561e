//! Shared domain types: positions, tower identifiers, quantized signal
//! levels, scans, fingerprints, and the radio map, plus the dBm <-> ASU
//! conversions used everywhere else.
//!
//! All rounding is round-half-up (ties toward positive infinity) so that
//! results reproduce exactly across platforms and languages.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::TowerUniverse;

/// Highest RSS level a GSM handset reports.
pub const ASU_MAX: u8 = 31;

/// Most towers a single scan may carry, per the GSM reporting limit.
pub const MAX_SCAN_TOWERS: usize = 7;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("ASU level {0} is outside [0, 31]")]
    AsuOutOfRange(i64),
    #[error("tower id must be a non-empty string")]
    EmptyTowerId,
    #[error("duplicate tower {0} in scan")]
    DuplicateTower(TowerId),
    #[error("scan carries {0} readings, the per-scan limit is 7")]
    TooManyReadings(usize),
    #[error("vector has {got} components, the universe lists {expected} towers")]
    VectorDimension { got: usize, expected: usize },
    #[error("bounds must be finite with the min corner not exceeding the max corner")]
    InvalidBounds,
    #[error("anchor at ({x}, {y}) lies outside the radio map bounds")]
    AnchorOutsideBounds { x: f64, y: f64 },
}

/// Round half up: ties go toward positive infinity. Comparing the
/// fractional part directly avoids the precision loss of adding 0.5.
pub(crate) fn round_half_up(x: f64) -> f64 {
    let floor = x.floor();
    if x - floor >= 0.5 {
        floor + 1.0
    } else {
        floor
    }
}

/// A 2D survey position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance to another position, in meters.
    pub fn distance(self, other: Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Opaque cell tower identifier. Equality and ordering are exact string
/// comparison; the lexicographic order fixes feature-vector indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TowerId(String);

impl TowerId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        if id.is_empty() {
            return Err(ModelError::EmptyTowerId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TowerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Quantized RSS level in arbitrary strength units, always within [0, 31].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Asu(u8);

impl Asu {
    pub const MIN: Asu = Asu(0);
    pub const MAX: Asu = Asu(ASU_MAX);

    pub fn new(level: u8) -> Result<Self, ModelError> {
        if level > ASU_MAX {
            return Err(ModelError::AsuOutOfRange(i64::from(level)));
        }
        Ok(Self(level))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Asu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Convert a dBm power to its GSM ASU level: `round((dbm + 113) / 2)`
/// clamped into [0, 31].
pub fn asu_from_dbm(power_dbm: f64) -> Result<Asu, ModelError> {
    if !power_dbm.is_finite() {
        return Err(ModelError::NonFinite("dBm power"));
    }
    quantize_asu((power_dbm + 113.0) / 2.0)
}

/// Inverse of [`asu_from_dbm`] on quantized levels: `2 * asu - 113` dBm.
///
/// The [0, 31] range check lives in [`Asu::new`]; a constructed level is
/// always convertible.
pub fn dbm_from_asu(level: Asu) -> f64 {
    2.0 * f64::from(level.value()) - 113.0
}

/// Round an ASU-scale value half up and clamp it into [0, 31].
pub fn quantize_asu(raw: f64) -> Result<Asu, ModelError> {
    if !raw.is_finite() {
        return Err(ModelError::NonFinite("ASU value"));
    }
    let rounded = round_half_up(raw).clamp(0.0, f64::from(ASU_MAX));
    Ok(Asu(rounded as u8))
}

/// One RF scan: the towers heard at a moment with their quantized levels.
///
/// Capacity is capped at seven readings at construction time; synthetic
/// feature vectors of higher dimension live in [`FeatureVector`] instead.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scan {
    readings: BTreeMap<TowerId, Asu>,
}

impl Scan {
    pub fn new(readings: BTreeMap<TowerId, Asu>) -> Result<Self, ModelError> {
        if readings.len() > MAX_SCAN_TOWERS {
            return Err(ModelError::TooManyReadings(readings.len()));
        }
        Ok(Self { readings })
    }

    /// Build a scan from (tower, level) pairs, rejecting duplicate towers.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (TowerId, Asu)>,
    {
        let mut readings = BTreeMap::new();
        for (tower, asu) in pairs {
            if readings.insert(tower.clone(), asu).is_some() {
                return Err(ModelError::DuplicateTower(tower));
            }
        }
        Self::new(readings)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn readings(&self) -> &BTreeMap<TowerId, Asu> {
        &self.readings
    }

    pub fn get(&self, tower: &TowerId) -> Option<Asu> {
        self.readings.get(tower).copied()
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }
}

/// A surveyed (position, scan) pair from the offline phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub position: Position,
    pub scan: Scan,
}

/// Fixed-dimension quantized signal vector aligned with a tower universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector(Vec<Asu>);

impl FeatureVector {
    pub fn new(values: Vec<Asu>) -> Self {
        Self(values)
    }

    /// Quantize continuous ASU-scale components into a vector.
    pub fn from_continuous(values: &[f64]) -> Result<Self, ModelError> {
        values
            .iter()
            .map(|&v| quantize_asu(v))
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }

    pub fn values(&self) -> &[Asu] {
        &self.0
    }

    pub fn to_continuous(&self) -> Vec<f64> {
        self.0.iter().map(|a| f64::from(a.value())).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(rename = "min_x_m")]
    pub min_x: f64,
    #[serde(rename = "min_y_m")]
    pub min_y: f64,
    #[serde(rename = "max_x_m")]
    pub max_x: f64,
    #[serde(rename = "max_y_m")]
    pub max_y: f64,
}

impl Bounds {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self, ModelError> {
        let bounds = Self {
            min_x,
            min_y,
            max_x,
            max_y,
        };
        if !bounds.is_valid() {
            return Err(ModelError::InvalidBounds);
        }
        Ok(bounds)
    }

    /// Tight bounding box of a set of positions; `None` when empty.
    pub fn from_positions<I>(positions: I) -> Option<Self>
    where
        I: IntoIterator<Item = Position>,
    {
        let mut iter = positions.into_iter();
        let first = iter.next()?;
        let mut bounds = Self {
            min_x: first.x,
            min_y: first.y,
            max_x: first.x,
            max_y: first.y,
        };
        for p in iter {
            bounds.min_x = bounds.min_x.min(p.x);
            bounds.min_y = bounds.min_y.min(p.y);
            bounds.max_x = bounds.max_x.max(p.x);
            bounds.max_y = bounds.max_y.max(p.y);
        }
        Some(bounds)
    }

    pub fn is_valid(&self) -> bool {
        self.min_x.is_finite()
            && self.min_y.is_finite()
            && self.max_x.is_finite()
            && self.max_y.is_finite()
            && self.min_x <= self.max_x
            && self.min_y <= self.max_y
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Inclusive containment: the rectangle edges count as inside.
    pub fn contains(&self, p: Position) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }
}

/// Whether an anchor was surveyed in the field or synthesized by the
/// spatial generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Seed,
    Synthetic,
}

/// One radio-map entry: a position with its quantized signal signature.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioMapAnchor {
    pub position: Position,
    pub vector: FeatureVector,
    pub provenance: Provenance,
}

/// The fingerprinting database: anchors with signal signatures over a
/// shared tower universe, bounded by the surveyed area.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioMap {
    universe: TowerUniverse,
    anchors: Vec<RadioMapAnchor>,
    bounds: Bounds,
}

impl RadioMap {
    pub fn new(
        universe: TowerUniverse,
        anchors: Vec<RadioMapAnchor>,
        bounds: Bounds,
    ) -> Result<Self, ModelError> {
        if !bounds.is_valid() {
            return Err(ModelError::InvalidBounds);
        }
        for anchor in &anchors {
            if anchor.vector.len() != universe.len() {
                return Err(ModelError::VectorDimension {
                    got: anchor.vector.len(),
                    expected: universe.len(),
                });
            }
            if !bounds.contains(anchor.position) {
                return Err(ModelError::AnchorOutsideBounds {
                    x: anchor.position.x,
                    y: anchor.position.y,
                });
            }
        }
        Ok(Self {
            universe,
            anchors,
            bounds,
        })
    }

    pub fn universe(&self) -> &TowerUniverse {
        &self.universe
    }

    pub fn anchors(&self) -> &[RadioMapAnchor] {
        &self.anchors
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tid(s: &str) -> TowerId {
        TowerId::new(s).unwrap()
    }

    #[test]
    fn asu_from_dbm_endpoints_and_rounding() {
        assert_eq!(asu_from_dbm(-113.0).unwrap().value(), 0);
        assert_eq!(asu_from_dbm(-51.0).unwrap().value(), 31);
        // (-80 + 113) / 2 = 16.5 rounds half up to 17
        assert_eq!(asu_from_dbm(-80.0).unwrap().value(), 17);
        // clamping on either side
        assert_eq!(asu_from_dbm(-140.0).unwrap().value(), 0);
        assert_eq!(asu_from_dbm(-20.0).unwrap().value(), 31);
    }

    #[test]
    fn dbm_from_asu_levels() {
        assert_eq!(dbm_from_asu(Asu::new(0).unwrap()), -113.0);
        assert_eq!(dbm_from_asu(Asu::new(31).unwrap()), -51.0);
        assert_eq!(dbm_from_asu(Asu::new(16).unwrap()), -81.0);
    }

    #[test]
    fn quantize_rounds_half_up_and_clamps() {
        assert_eq!(quantize_asu(12.5).unwrap().value(), 13);
        assert_eq!(quantize_asu(-2.0).unwrap().value(), 0);
        assert_eq!(quantize_asu(35.0).unwrap().value(), 31);
        assert_eq!(quantize_asu(0.49999999999999994).unwrap().value(), 0);
    }

    #[test]
    fn conversion_round_trip_all_levels() {
        for level in 0..=ASU_MAX {
            let asu = Asu::new(level).unwrap();
            assert_eq!(asu_from_dbm(dbm_from_asu(asu)).unwrap(), asu);
        }
    }

    #[test]
    fn non_finite_inputs_rejected() {
        assert!(asu_from_dbm(f64::NAN).is_err());
        assert!(asu_from_dbm(f64::INFINITY).is_err());
        assert!(quantize_asu(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn asu_range_enforced_at_construction() {
        assert!(Asu::new(31).is_ok());
        assert!(matches!(Asu::new(32), Err(ModelError::AsuOutOfRange(32))));
    }

    #[test]
    fn tower_id_must_be_non_empty() {
        assert!(matches!(TowerId::new(""), Err(ModelError::EmptyTowerId)));
        assert_eq!(tid("T1").as_str(), "T1");
    }

    #[test]
    fn scan_capacity_capped_at_seven() {
        let pairs: Vec<_> = (0..8)
            .map(|i| (tid(&format!("T{i}")), Asu::new(5).unwrap()))
            .collect();
        assert!(matches!(
            Scan::from_pairs(pairs),
            Err(ModelError::TooManyReadings(8))
        ));
        let pairs: Vec<_> = (0..7)
            .map(|i| (tid(&format!("T{i}")), Asu::new(5).unwrap()))
            .collect();
        assert_eq!(Scan::from_pairs(pairs).unwrap().len(), 7);
    }

    #[test]
    fn scan_rejects_duplicate_towers() {
        let pairs = vec![
            (tid("T1"), Asu::new(3).unwrap()),
            (tid("T1"), Asu::new(9).unwrap()),
        ];
        assert!(matches!(
            Scan::from_pairs(pairs),
            Err(ModelError::DuplicateTower(_))
        ));
    }

    #[test]
    fn bounds_containment_is_inclusive() {
        let b = Bounds::new(0.0, 0.0, 10.0, 5.0).unwrap();
        assert!(b.contains(Position::new(0.0, 0.0)));
        assert!(b.contains(Position::new(10.0, 5.0)));
        assert!(!b.contains(Position::new(10.01, 5.0)));
        assert_eq!(b.area(), 50.0);
    }

    #[test]
    fn bounds_from_positions_is_tight() {
        let b = Bounds::from_positions(vec![
            Position::new(2.0, 3.0),
            Position::new(-1.0, 7.0),
            Position::new(4.0, 0.5),
        ])
        .unwrap();
        assert_eq!((b.min_x, b.min_y, b.max_x, b.max_y), (-1.0, 0.5, 4.0, 7.0));
        assert!(Bounds::from_positions(std::iter::empty()).is_none());
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(Bounds::new(1.0, 0.0, 0.0, 5.0).is_err());
        assert!(Bounds::new(0.0, f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn radio_map_checks_dimensions_and_containment() {
        let universe = TowerUniverse::new(vec![tid("T1"), tid("T2")]).unwrap();
        let bounds = Bounds::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let good = RadioMapAnchor {
            position: Position::new(1.0, 1.0),
            vector: FeatureVector::new(vec![Asu::new(5).unwrap(), Asu::new(0).unwrap()]),
            provenance: Provenance::Seed,
        };
        assert!(RadioMap::new(universe.clone(), vec![good.clone()], bounds).is_ok());

        let short = RadioMapAnchor {
            vector: FeatureVector::new(vec![Asu::new(5).unwrap()]),
            ..good.clone()
        };
        assert!(matches!(
            RadioMap::new(universe.clone(), vec![short], bounds),
            Err(ModelError::VectorDimension {
                got: 1,
                expected: 2
            })
        ));

        let outside = RadioMapAnchor {
            position: Position::new(11.0, 1.0),
            ..good
        };
        assert!(matches!(
            RadioMap::new(universe, vec![outside], bounds),
            Err(ModelError::AnchorOutsideBounds { .. })
        ));
    }
}
