//! Deterministic fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use celldense::densify::{densify_radio_map, seed_radio_map, DensifyConfig, Interpolator};
use celldense::model::{Fingerprint, RadioMap};
use celldense::preprocess::{build_tower_universe, SplitConfig};
use celldense::simulate::{Environment, EnvironmentSpec};

pub const QUERY_COUNT: usize = 64;

/// Everything the benchmarks exercise, built once from a fixed seed.
pub struct Fixture {
    pub seeds: Vec<Fingerprint>,
    pub queries: Vec<Fingerprint>,
    pub interpolator: Interpolator,
    pub seed_map: RadioMap,
    pub densified_map: RadioMap,
    pub densify_config: DensifyConfig,
    pub split: SplitConfig,
}

pub fn fixture() -> Fixture {
    let env = Environment::generate(EnvironmentSpec {
        rng_seed: 1,
        ..EnvironmentSpec::default()
    })
    .expect("default spec is valid");
    let mut survey_rng = ChaCha8Rng::seed_from_u64(2);
    let seeds = env
        .sample_seed_set(0.39, &mut survey_rng)
        .expect("survey succeeds");
    let mut query_rng = ChaCha8Rng::seed_from_u64(3);
    let queries = env
        .sample_scatter(QUERY_COUNT, &mut query_rng)
        .expect("scatter succeeds");

    let densify_config = DensifyConfig::default();
    let split = SplitConfig {
        rng_seed: 4,
        ..SplitConfig::default()
    };
    let universe = build_tower_universe(&seeds).expect("towers heard");
    let interpolator =
        Interpolator::fit(&seeds, &universe, &densify_config).expect("fit succeeds");
    let seed_map = seed_radio_map(&seeds).expect("seed map builds");
    let densified_map = densify_radio_map(&seeds, &densify_config, &split)
        .expect("densification succeeds")
        .map;

    Fixture {
        seeds,
        queries,
        interpolator,
        seed_map,
        densified_map,
        densify_config,
        split,
    }
}
