//! File formats: every artifact is a single UTF-8 JSON document with a
//! `schema_version` field, pretty-printed with sorted map keys so runs are
//! diffable and byte-reproducible. The exact grammar lives in the repo's
//! FORMATS.md; round-trip stability is enforced by property tests.
//!
//! Parsing goes through plain data-transfer structs and then validates
//! into domain types, so error messages name the offending record.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::densify::ValidationReport;
use crate::eval::{DensityReport, ErrorStats};
use crate::localize::{Engine, LocalizationEstimate};
use crate::model::{
    Asu, Bounds, FeatureVector, Fingerprint, Position, Provenance, RadioMap, RadioMapAnchor, Scan,
    TowerId,
};
use crate::preprocess::TowerUniverse;

/// Version stamped into and required of every document.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported schema version {found}, this build reads version {expected}")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("{0}")]
    Validation(String),
}

fn check_schema(found: u32) -> Result<(), FormatError> {
    if found != SCHEMA_VERSION {
        return Err(FormatError::SchemaVersion {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(())
}

fn invalid(message: impl Into<String>) -> FormatError {
    FormatError::Validation(message.into())
}

fn to_pretty_bytes<T: Serialize>(doc: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(doc).expect("documents always serialize");
    bytes.push(b'\n');
    bytes
}

// ---------------------------------------------------------------------------
// fingerprint files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FingerprintFileDoc {
    schema_version: u32,
    fingerprints: Vec<FingerprintRecord>,
}

#[derive(Serialize, Deserialize)]
struct FingerprintRecord {
    x_m: f64,
    y_m: f64,
    /// Heard towers only; an absent key means "not heard", distinct from a
    /// tower heard at level 0.
    readings: BTreeMap<String, u8>,
}

pub fn parse_fingerprints(bytes: &[u8]) -> Result<Vec<Fingerprint>, FormatError> {
    let doc: FingerprintFileDoc = serde_json::from_slice(bytes)?;
    check_schema(doc.schema_version)?;
    doc.fingerprints
        .iter()
        .enumerate()
        .map(|(index, record)| {
            if !record.x_m.is_finite() || !record.y_m.is_finite() {
                return Err(invalid(format!("fingerprint {index}: position must be finite")));
            }
            let mut readings = BTreeMap::new();
            for (tower, &level) in &record.readings {
                let tower = TowerId::new(tower.clone())
                    .map_err(|e| invalid(format!("fingerprint {index}: {e}")))?;
                let asu = Asu::new(level)
                    .map_err(|e| invalid(format!("fingerprint {index}, tower {tower}: {e}")))?;
                readings.insert(tower, asu);
            }
            let scan =
                Scan::new(readings).map_err(|e| invalid(format!("fingerprint {index}: {e}")))?;
            Ok(Fingerprint {
                position: Position::new(record.x_m, record.y_m),
                scan,
            })
        })
        .collect()
}

pub fn emit_fingerprints(fingerprints: &[Fingerprint]) -> Vec<u8> {
    let doc = FingerprintFileDoc {
        schema_version: SCHEMA_VERSION,
        fingerprints: fingerprints
            .iter()
            .map(|fp| FingerprintRecord {
                x_m: fp.position.x,
                y_m: fp.position.y,
                readings: fp
                    .scan
                    .readings()
                    .iter()
                    .map(|(tower, asu)| (tower.as_str().to_owned(), asu.value()))
                    .collect(),
            })
            .collect(),
    };
    to_pretty_bytes(&doc)
}

// ---------------------------------------------------------------------------
// radio map files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RadioMapDoc {
    schema_version: u32,
    universe: Vec<String>,
    bounds: Bounds,
    anchors: Vec<AnchorRecord>,
}

#[derive(Serialize, Deserialize)]
struct AnchorRecord {
    x_m: f64,
    y_m: f64,
    vector: Vec<u8>,
    provenance: Provenance,
}

pub fn parse_radio_map(bytes: &[u8]) -> Result<RadioMap, FormatError> {
    let doc: RadioMapDoc = serde_json::from_slice(bytes)?;
    check_schema(doc.schema_version)?;

    let towers = doc
        .universe
        .iter()
        .enumerate()
        .map(|(index, id)| {
            TowerId::new(id.clone()).map_err(|e| invalid(format!("universe entry {index}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let universe =
        TowerUniverse::new(towers).map_err(|e| invalid(format!("universe: {e}")))?;

    if !doc.bounds.is_valid() {
        return Err(invalid("bounds must be finite and ordered"));
    }

    let anchors = doc
        .anchors
        .iter()
        .enumerate()
        .map(|(index, record)| {
            if !record.x_m.is_finite() || !record.y_m.is_finite() {
                return Err(invalid(format!("anchor {index}: position must be finite")));
            }
            if record.vector.len() != universe.len() {
                return Err(invalid(format!(
                    "anchor {index}: vector has {} components but the universe lists {} towers",
                    record.vector.len(),
                    universe.len()
                )));
            }
            let vector = record
                .vector
                .iter()
                .map(|&level| Asu::new(level))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| invalid(format!("anchor {index}: {e}")))?;
            Ok(RadioMapAnchor {
                position: Position::new(record.x_m, record.y_m),
                vector: FeatureVector::new(vector),
                provenance: record.provenance,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    RadioMap::new(universe, anchors, doc.bounds).map_err(|e| invalid(e.to_string()))
}

pub fn emit_radio_map(map: &RadioMap) -> Vec<u8> {
    let doc = RadioMapDoc {
        schema_version: SCHEMA_VERSION,
        universe: map
            .universe()
            .iter()
            .map(|t| t.as_str().to_owned())
            .collect(),
        bounds: *map.bounds(),
        anchors: map
            .anchors()
            .iter()
            .map(|anchor| AnchorRecord {
                x_m: anchor.position.x,
                y_m: anchor.position.y,
                vector: anchor.vector.values().iter().map(|a| a.value()).collect(),
                provenance: anchor.provenance,
            })
            .collect(),
    };
    to_pretty_bytes(&doc)
}

// ---------------------------------------------------------------------------
// estimate files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct EstimatesDoc {
    schema_version: u32,
    engine: Engine,
    estimates: Vec<EstimateRecord>,
}

#[derive(Serialize, Deserialize)]
struct EstimateRecord {
    x_m: f64,
    y_m: f64,
    score: f64,
}

/// Estimates are ordered like the query fingerprints that produced them.
pub fn emit_estimates(engine: Engine, estimates: &[LocalizationEstimate]) -> Vec<u8> {
    let doc = EstimatesDoc {
        schema_version: SCHEMA_VERSION,
        engine,
        estimates: estimates
            .iter()
            .map(|estimate| EstimateRecord {
                x_m: estimate.position.x,
                y_m: estimate.position.y,
                score: estimate.score,
            })
            .collect(),
    };
    to_pretty_bytes(&doc)
}

pub fn parse_estimates(bytes: &[u8]) -> Result<(Engine, Vec<LocalizationEstimate>), FormatError> {
    let doc: EstimatesDoc = serde_json::from_slice(bytes)?;
    check_schema(doc.schema_version)?;
    let estimates = doc
        .estimates
        .iter()
        .enumerate()
        .map(|(index, record)| {
            if !record.x_m.is_finite() || !record.y_m.is_finite() || !record.score.is_finite() {
                return Err(invalid(format!("estimate {index}: fields must be finite")));
            }
            Ok(LocalizationEstimate {
                position: Position::new(record.x_m, record.y_m),
                score: record.score,
                engine: doc.engine,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((doc.engine, estimates))
}

// ---------------------------------------------------------------------------
// interpolator validation report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationDoc {
    pub schema_version: u32,
    /// Neighbor count chosen by model selection.
    pub best_k: usize,
    pub holdout_count: usize,
    pub rmse_overall_asu: f64,
    pub rmse_per_tower_asu: Vec<f64>,
    /// Selection trace over the feasible search range.
    pub per_k: Vec<KCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCandidate {
    pub k: usize,
    pub rmse_overall_asu: f64,
}

pub fn validation_doc(
    best_k: usize,
    report: &ValidationReport,
    per_k: &[(usize, ValidationReport)],
) -> ValidationDoc {
    ValidationDoc {
        schema_version: SCHEMA_VERSION,
        best_k,
        holdout_count: report.holdout_count,
        rmse_overall_asu: report.rmse_overall,
        rmse_per_tower_asu: report.rmse_per_tower.clone(),
        per_k: per_k
            .iter()
            .map(|(k, r)| KCandidate {
                k: *k,
                rmse_overall_asu: r.rmse_overall,
            })
            .collect(),
    }
}

pub fn emit_validation(doc: &ValidationDoc) -> Vec<u8> {
    to_pretty_bytes(doc)
}

pub fn parse_validation(bytes: &[u8]) -> Result<ValidationDoc, FormatError> {
    let doc: ValidationDoc = serde_json::from_slice(bytes)?;
    check_schema(doc.schema_version)?;
    Ok(doc)
}

// ---------------------------------------------------------------------------
// evaluation report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub schema_version: u32,
    pub density: DensitySection,
    pub comparisons: Vec<EngineComparison>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySection {
    pub before_per_m2: f64,
    pub after_per_m2: f64,
    pub increase_percent: f64,
}

impl From<DensityReport> for DensitySection {
    fn from(report: DensityReport) -> Self {
        Self {
            before_per_m2: report.before,
            after_per_m2: report.after,
            increase_percent: report.increase_percent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineComparison {
    pub engine: Engine,
    pub baseline: ErrorStatsSection,
    pub enhanced: ErrorStatsSection,
    /// Median-based headline improvement, percent.
    pub improvement_percent: f64,
    /// Mean-based secondary improvement, percent.
    pub improvement_mean_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStatsSection {
    pub mean_m: f64,
    pub median_m: f64,
    pub p75_m: f64,
    pub p90_m: f64,
    pub max_m: f64,
    pub cdf: Vec<(f64, f64)>,
}

impl From<&ErrorStats> for ErrorStatsSection {
    fn from(stats: &ErrorStats) -> Self {
        Self {
            mean_m: stats.mean,
            median_m: stats.median,
            p75_m: stats.p75,
            p90_m: stats.p90,
            max_m: stats.max,
            cdf: stats.cdf.clone(),
        }
    }
}

pub fn emit_report(report: &ReportDoc) -> Vec<u8> {
    to_pretty_bytes(report)
}

pub fn parse_report(bytes: &[u8]) -> Result<ReportDoc, FormatError> {
    let doc: ReportDoc = serde_json::from_slice(bytes)?;
    check_schema(doc.schema_version)?;
    Ok(doc)
}

/// Human-readable twin of the JSON report.
pub fn render_report_text(report: &ReportDoc) -> String {
    let mut out = String::new();
    out.push_str("radio map densification report\n");
    out.push_str("==============================\n\n");
    out.push_str(&format!(
        "anchor density : {:.6} /m^2 -> {:.6} /m^2\n",
        report.density.before_per_m2, report.density.after_per_m2
    ));
    out.push_str(&format!(
        "coverage gain  : {:+.2}%\n\n",
        report.density.increase_percent
    ));
    out.push_str(&format!(
        "{:<15} {:>10} {:>10} {:>10} {:>10} {:>12} {:>12}\n",
        "engine", "med base", "med enh", "p90 base", "p90 enh", "impr med %", "impr mean %"
    ));
    for comparison in &report.comparisons {
        out.push_str(&format!(
            "{:<15} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>12.2} {:>12.2}\n",
            comparison.engine.to_string(),
            comparison.baseline.median_m,
            comparison.enhanced.median_m,
            comparison.baseline.p90_m,
            comparison.enhanced.p90_m,
            comparison.improvement_percent,
            comparison.improvement_mean_percent
        ));
    }
    out
}

/// Two-column CSV of an empirical error CDF: header row, `.` decimal
/// separator, newline-terminated.
pub fn emit_cdf_csv(cdf: &[(f64, f64)]) -> Vec<u8> {
    let mut out = String::from("error_m,cum_fraction\n");
    for (error, fraction) in cdf {
        out.push_str(&format!("{error},{fraction}\n"));
    }
    out.into_bytes()
}

// ---------------------------------------------------------------------------
// run configuration
// ---------------------------------------------------------------------------

/// Everything a full run needs. The `rng_seed` here is the master seed;
/// the CLI's `--seed` flag overrides it, and all stream seeds (environment,
/// survey, test sampling, split) derive from the master deterministically,
/// overriding any `rng_seed` inside the sub-configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub environment: crate::simulate::EnvironmentSpec,
    pub seed_density_per_m2: f64,
    pub test_scan_count: usize,
    pub densify: crate::densify::DensifyConfig,
    pub localize: crate::localize::LocalizeConfig,
    pub split: crate::preprocess::SplitConfig,
    /// Output directory; the CLI's `--out` flag takes precedence.
    pub output_dir: Option<String>,
    pub rng_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            environment: crate::simulate::EnvironmentSpec::default(),
            seed_density_per_m2: 0.39,
            test_scan_count: 200,
            densify: crate::densify::DensifyConfig::default(),
            // radius zero lets every synthetic anchor stand as its own
            // candidate location, which is where the densified map pays off
            // for the probabilistic engine
            localize: crate::localize::LocalizeConfig {
                smoothing_radius_m: Some(0.0),
                ..crate::localize::LocalizeConfig::default()
            },
            split: crate::preprocess::SplitConfig::default(),
            output_dir: None,
            rng_seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), FormatError> {
        self.environment
            .validate()
            .map_err(|e| invalid(format!("environment: {e}")))?;
        self.densify
            .validate()
            .map_err(|e| invalid(format!("densify: {e}")))?;
        self.localize
            .validate()
            .map_err(|e| invalid(format!("localize: {e}")))?;
        self.split
            .validate()
            .map_err(|e| invalid(format!("split: {e}")))?;
        if !(self.seed_density_per_m2 > 0.0) || !self.seed_density_per_m2.is_finite() {
            return Err(invalid("seed_density_per_m2 must be positive"));
        }
        if self.test_scan_count < 1 {
            return Err(invalid("test_scan_count must be at least 1"));
        }
        Ok(())
    }
}

pub fn parse_run_config(bytes: &[u8]) -> Result<RunConfig, FormatError> {
    let config: RunConfig = serde_json::from_slice(bytes)?;
    check_schema(config.schema_version)?;
    config.validate()?;
    Ok(config)
}

pub fn emit_run_config(config: &RunConfig) -> Vec<u8> {
    to_pretty_bytes(config)
}
