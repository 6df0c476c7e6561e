//! Command-line surface tying the pipeline together: `simulate`,
//! `densify`, `localize`, `evaluate`, and the end-to-end `pipeline`.
//!
//! Every subcommand takes `--seed`, `--config`, and `--out`. All stream
//! seeds (environment, survey, test sampling, split) derive from the one
//! master seed in a fixed order shared across subcommands, so running the
//! stages individually reproduces the pipeline bit for bit. Outputs are
//! written to a temp file and renamed into place, so an interrupted run
//! never leaves a partial artifact behind.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use celldense::densify::{densify_radio_map, seed_radio_map};
use celldense::eval::{
    anchor_density, error_stats, improvement, mean_improvement, DensityReport, ErrorStats,
};
use celldense::format::{
    emit_cdf_csv, emit_estimates, emit_fingerprints, emit_radio_map, emit_report, emit_validation,
    parse_estimates, parse_fingerprints, parse_radio_map, parse_run_config, render_report_text,
    validation_doc, EngineComparison, ReportDoc, RunConfig, SCHEMA_VERSION,
};
use celldense::localize::{
    fit_probabilistic, knn_locate, ml_locate, Engine, LocalizationEstimate, LocalizeConfig,
};
use celldense::model::{Fingerprint, RadioMap};
use celldense::preprocess::SplitConfig;
use celldense::simulate::{Environment, EnvironmentSpec};

/// Fixed file names under the output directory.
pub mod files {
    use celldense::localize::Engine;

    pub const SEEDS: &str = "seeds.json";
    pub const TEST: &str = "test.json";
    pub const MAP_SEED: &str = "radio_map_seed.json";
    pub const MAP_DENSIFIED: &str = "radio_map_densified.json";
    pub const VALIDATION: &str = "validation.json";
    pub const REPORT_JSON: &str = "report.json";
    pub const REPORT_TEXT: &str = "report.txt";
    pub const CDF_BASELINE: &str = "cdf_baseline.csv";
    pub const CDF_ENHANCED: &str = "cdf_enhanced.csv";

    /// Estimates written by the standalone `localize` subcommand.
    pub fn estimates_file(engine: Engine) -> String {
        format!("estimates_{engine}.json")
    }

    /// Pipeline estimates: one file per (engine, map kind).
    pub fn estimates(engine: Engine, map_kind: &str) -> String {
        format!("estimates_{engine}_{map_kind}.json")
    }

    /// Pipeline CDF exports: one CSV per (engine, map kind).
    pub fn cdf(engine: Engine, map_kind: &str) -> String {
        format!("cdf_{engine}_{map_kind}.csv")
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "celldense",
    version,
    about = "Densify a cellular radio map from sparse seed fingerprints and localize against it"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic environment and sample seed + test fingerprints
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Build a densified radio map and validation report from fingerprints
    Densify {
        /// Seed fingerprint file
        #[arg(long)]
        fingerprints: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Estimate positions for query scans against a radio map
    Localize {
        /// Radio map file
        #[arg(long)]
        map: PathBuf,
        /// Query fingerprint file (positions are ignored, scans are used)
        #[arg(long)]
        queries: PathBuf,
        /// Localization engine
        #[arg(long, value_enum, default_value_t = EngineArg::Knn)]
        engine: EngineArg,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare baseline and enhanced estimates against ground truth
    Evaluate {
        /// Ground-truth fingerprint file the queries were sampled from
        #[arg(long)]
        truth: PathBuf,
        /// Estimates produced against the sparse baseline map
        #[arg(long)]
        baseline: PathBuf,
        /// Estimates produced against the densified map
        #[arg(long)]
        enhanced: PathBuf,
        /// Radio map backing the baseline estimates
        #[arg(long)]
        map_before: PathBuf,
        /// Radio map backing the enhanced estimates
        #[arg(long)]
        map_after: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run simulate, densify, localize, and evaluate end to end
    Pipeline {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Master RNG seed; overrides the config file's rng_seed
    #[arg(long)]
    seed: Option<u64>,
    /// Run configuration file (JSON); defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: config output_dir, then "out")
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Knn,
    Probabilistic,
}

impl From<EngineArg> for Engine {
    fn from(arg: EngineArg) -> Self {
        match arg {
            EngineArg::Knn => Engine::Knn,
            EngineArg::Probabilistic => Engine::Probabilistic,
        }
    }
}

/// Parse arguments and run. Returns the process exit status: 0 on
/// success, 1 on any runtime failure, 2 on a usage error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return 2;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

/// Stream seeds derived from the master seed, in a fixed order shared by
/// every subcommand, so composed stages reproduce the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedSeeds {
    pub environment: u64,
    pub survey: u64,
    pub test_scatter: u64,
    pub split: u64,
}

pub fn derive_seeds(master: u64) -> DerivedSeeds {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    DerivedSeeds {
        environment: rng.next_u64(),
        survey: rng.next_u64(),
        test_scatter: rng.next_u64(),
        split: rng.next_u64(),
    }
}

/// Write through a temp file in the destination directory plus rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::Builder::new()
        .prefix(".celldense-")
        .tempfile_in(dir)
        .with_context(|| format!("creating a temp file in {}", dir.display()))?;
    tmp.write_all(bytes)
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("moving output into {}", path.display()))?;
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    match &common.config {
        Some(path) => {
            let bytes = read_file(path)?;
            Ok(parse_run_config(&bytes)
                .with_context(|| format!("parsing config {}", path.display()))?)
        }
        None => Ok(RunConfig::default()),
    }
}

fn resolve_seed(common: &CommonArgs, config: &RunConfig) -> u64 {
    common.seed.unwrap_or(config.rng_seed)
}

fn resolve_out(common: &CommonArgs, config: &RunConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// The environment realization plus both sampled datasets for a
/// (config, master seed) pair.
pub struct SimulatedData {
    pub environment: Environment,
    pub seeds: Vec<Fingerprint>,
    pub test: Vec<Fingerprint>,
}

pub fn simulate_data(config: &RunConfig, master_seed: u64) -> Result<SimulatedData> {
    let derived = derive_seeds(master_seed);
    let spec = EnvironmentSpec {
        rng_seed: derived.environment,
        ..config.environment.clone()
    };
    let environment = Environment::generate(spec)?;
    let mut survey_rng = ChaCha8Rng::seed_from_u64(derived.survey);
    let seeds = environment.sample_seed_set(config.seed_density_per_m2, &mut survey_rng)?;
    let mut test_rng = ChaCha8Rng::seed_from_u64(derived.test_scatter);
    let test = environment.sample_scatter(config.test_scan_count, &mut test_rng)?;
    Ok(SimulatedData {
        environment,
        seeds,
        test,
    })
}

/// Batch localization of query scans with one engine against one map.
pub fn locate_all(
    map: &RadioMap,
    queries: &[Fingerprint],
    engine: Engine,
    cfg: &LocalizeConfig,
) -> Result<Vec<LocalizationEstimate>> {
    match engine {
        Engine::Knn => queries
            .iter()
            .map(|fp| Ok(knn_locate(map, &fp.scan, cfg)?))
            .collect(),
        Engine::Probabilistic => {
            let model = fit_probabilistic(map, cfg)?;
            queries
                .iter()
                .map(|fp| Ok(ml_locate(&model, &fp.scan)?))
                .collect()
        }
    }
}

fn stats_against_truth(
    estimates: &[LocalizationEstimate],
    truth: &[Fingerprint],
) -> Result<ErrorStats> {
    if estimates.len() != truth.len() {
        bail!(
            "estimate count {} does not match truth count {}",
            estimates.len(),
            truth.len()
        );
    }
    let pairs: Vec<_> = estimates
        .iter()
        .zip(truth)
        .map(|(estimate, fp)| (estimate.position, fp.position))
        .collect();
    Ok(error_stats(&pairs)?)
}

fn build_comparison(
    engine: Engine,
    baseline: &ErrorStats,
    enhanced: &ErrorStats,
) -> Result<EngineComparison> {
    Ok(EngineComparison {
        engine,
        baseline: baseline.into(),
        enhanced: enhanced.into(),
        improvement_percent: improvement(baseline, enhanced)?,
        improvement_mean_percent: mean_improvement(baseline, enhanced)?,
    })
}

/// The full offline + online + evaluation pass. Every artifact lands
/// under `out`; the written report is also returned.
pub fn run_pipeline(config: &RunConfig, master_seed: u64, out: &Path) -> Result<ReportDoc> {
    config.validate()?;
    let data = simulate_data(config, master_seed)?;
    write_atomic(&out.join(files::SEEDS), &emit_fingerprints(&data.seeds))?;
    write_atomic(&out.join(files::TEST), &emit_fingerprints(&data.test))?;

    let baseline_map = seed_radio_map(&data.seeds)?;
    write_atomic(&out.join(files::MAP_SEED), &emit_radio_map(&baseline_map))?;

    let split = SplitConfig {
        rng_seed: derive_seeds(master_seed).split,
        ..config.split
    };
    let outcome = densify_radio_map(&data.seeds, &config.densify, &split)?;
    write_atomic(&out.join(files::MAP_DENSIFIED), &emit_radio_map(&outcome.map))?;
    write_atomic(
        &out.join(files::VALIDATION),
        &emit_validation(&validation_doc(
            outcome.best_k,
            &outcome.validation,
            &outcome.per_k,
        )),
    )?;

    let density = DensityReport::new(
        anchor_density(&baseline_map)?,
        anchor_density(&outcome.map)?,
    )?;

    let mut comparisons = Vec::new();
    for engine in [Engine::Knn, Engine::Probabilistic] {
        let base = locate_all(&baseline_map, &data.test, engine, &config.localize)?;
        let enhanced = locate_all(&outcome.map, &data.test, engine, &config.localize)?;
        write_atomic(
            &out.join(files::estimates(engine, "seed")),
            &emit_estimates(engine, &base),
        )?;
        write_atomic(
            &out.join(files::estimates(engine, "densified")),
            &emit_estimates(engine, &enhanced),
        )?;

        let base_stats = stats_against_truth(&base, &data.test)?;
        let enhanced_stats = stats_against_truth(&enhanced, &data.test)?;
        write_atomic(
            &out.join(files::cdf(engine, "seed")),
            &emit_cdf_csv(&base_stats.cdf),
        )?;
        write_atomic(
            &out.join(files::cdf(engine, "densified")),
            &emit_cdf_csv(&enhanced_stats.cdf),
        )?;
        comparisons.push(build_comparison(engine, &base_stats, &enhanced_stats)?);
    }

    let report = ReportDoc {
        schema_version: SCHEMA_VERSION,
        density: density.into(),
        comparisons,
    };
    write_atomic(&out.join(files::REPORT_JSON), &emit_report(&report))?;
    write_atomic(
        &out.join(files::REPORT_TEXT),
        render_report_text(&report).as_bytes(),
    )?;
    Ok(report)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate { common } => {
            let config = load_config(&common)?;
            let seed = resolve_seed(&common, &config);
            let out = resolve_out(&common, &config);
            let data = simulate_data(&config, seed)?;
            write_atomic(&out.join(files::SEEDS), &emit_fingerprints(&data.seeds))?;
            write_atomic(&out.join(files::TEST), &emit_fingerprints(&data.test))?;
            println!(
                "sampled {} seed and {} test fingerprints into {}",
                data.seeds.len(),
                data.test.len(),
                out.display()
            );
            Ok(())
        }
        Command::Densify {
            fingerprints,
            common,
        } => {
            let config = load_config(&common)?;
            let seed = resolve_seed(&common, &config);
            let out = resolve_out(&common, &config);
            let seeds = parse_fingerprints(&read_file(&fingerprints)?)
                .with_context(|| format!("parsing {}", fingerprints.display()))?;
            let split = SplitConfig {
                rng_seed: derive_seeds(seed).split,
                ..config.split
            };
            let outcome = densify_radio_map(&seeds, &config.densify, &split)?;
            write_atomic(&out.join(files::MAP_DENSIFIED), &emit_radio_map(&outcome.map))?;
            write_atomic(
                &out.join(files::VALIDATION),
                &emit_validation(&validation_doc(
                    outcome.best_k,
                    &outcome.validation,
                    &outcome.per_k,
                )),
            )?;
            println!(
                "densified {} seeds into {} anchors (k = {}, holdout RMSE {:.3} ASU)",
                seeds.len(),
                outcome.map.len(),
                outcome.best_k,
                outcome.validation.rmse_overall
            );
            Ok(())
        }
        Command::Localize {
            map,
            queries,
            engine,
            common,
        } => {
            let config = load_config(&common)?;
            let out = resolve_out(&common, &config);
            let radio_map = parse_radio_map(&read_file(&map)?)
                .with_context(|| format!("parsing {}", map.display()))?;
            let query_fps = parse_fingerprints(&read_file(&queries)?)
                .with_context(|| format!("parsing {}", queries.display()))?;
            let engine: Engine = engine.into();
            let estimates = locate_all(&radio_map, &query_fps, engine, &config.localize)?;
            let path = out.join(files::estimates_file(engine));
            write_atomic(&path, &emit_estimates(engine, &estimates))?;
            println!(
                "localized {} scans with the {engine} engine into {}",
                estimates.len(),
                path.display()
            );
            Ok(())
        }
        Command::Evaluate {
            truth,
            baseline,
            enhanced,
            map_before,
            map_after,
            common,
        } => {
            let config = load_config(&common)?;
            let out = resolve_out(&common, &config);
            let truth_fps = parse_fingerprints(&read_file(&truth)?)
                .with_context(|| format!("parsing {}", truth.display()))?;
            let (engine_base, base) = parse_estimates(&read_file(&baseline)?)
                .with_context(|| format!("parsing {}", baseline.display()))?;
            let (engine_enhanced, enhanced_estimates) = parse_estimates(&read_file(&enhanced)?)
                .with_context(|| format!("parsing {}", enhanced.display()))?;
            if engine_base != engine_enhanced {
                bail!("estimate files use different engines ({engine_base} vs {engine_enhanced})");
            }
            let before_map = parse_radio_map(&read_file(&map_before)?)
                .with_context(|| format!("parsing {}", map_before.display()))?;
            let after_map = parse_radio_map(&read_file(&map_after)?)
                .with_context(|| format!("parsing {}", map_after.display()))?;

            let density = DensityReport::new(
                anchor_density(&before_map)?,
                anchor_density(&after_map)?,
            )?;
            let base_stats = stats_against_truth(&base, &truth_fps)?;
            let enhanced_stats = stats_against_truth(&enhanced_estimates, &truth_fps)?;
            let report = ReportDoc {
                schema_version: SCHEMA_VERSION,
                density: density.into(),
                comparisons: vec![build_comparison(engine_base, &base_stats, &enhanced_stats)?],
            };
            write_atomic(&out.join(files::REPORT_JSON), &emit_report(&report))?;
            write_atomic(
                &out.join(files::REPORT_TEXT),
                render_report_text(&report).as_bytes(),
            )?;
            write_atomic(&out.join(files::CDF_BASELINE), &emit_cdf_csv(&base_stats.cdf))?;
            write_atomic(&out.join(files::CDF_ENHANCED), &emit_cdf_csv(&enhanced_stats.cdf))?;
            print!("{}", render_report_text(&report));
            Ok(())
        }
        Command::Pipeline { common } => {
            let config = load_config(&common)?;
            let seed = resolve_seed(&common, &config);
            let out = resolve_out(&common, &config);
            let report = run_pipeline(&config, seed, &out)?;
            print!("{}", render_report_text(&report));
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_derivation_is_stable() {
        assert_eq!(derive_seeds(7), derive_seeds(7));
        assert_ne!(derive_seeds(7), derive_seeds(8));
    }

    #[test]
    fn atomic_write_creates_parents_and_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("artifact.json");
        write_atomic(&path, b"{}\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"{}\n");
        let leftovers: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .filter_map(|entry| entry.ok())
            .filter(|entry| entry.file_name().to_string_lossy().starts_with(".celldense-"))
            .collect();
        assert!(leftovers.is_empty());
    }
}
