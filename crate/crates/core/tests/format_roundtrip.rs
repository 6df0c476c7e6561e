//! Round-trip stability of the file formats on randomized documents.

use proptest::prelude::*;

use celldense::format::{
    emit_estimates, emit_fingerprints, emit_radio_map, parse_estimates, parse_fingerprints,
    parse_radio_map,
};
use celldense::localize::{Engine, LocalizationEstimate};
use celldense::model::{
    Asu, Bounds, FeatureVector, Fingerprint, Position, Provenance, RadioMap, RadioMapAnchor, Scan,
    TowerId,
};
use celldense::preprocess::TowerUniverse;

fn tid(index: usize) -> TowerId {
    TowerId::new(format!("T{index:02}")).unwrap()
}

fn asu(level: u8) -> Asu {
    Asu::new(level).unwrap()
}

prop_compose! {
    fn arb_fingerprint()(
        x in -100.0..100.0f64,
        y in -100.0..100.0f64,
        readings in proptest::collection::btree_map(0..15usize, 0..=31u8, 0..=7usize),
    ) -> Fingerprint {
        Fingerprint {
            position: Position::new(x, y),
            scan: Scan::from_pairs(readings.into_iter().map(|(i, l)| (tid(i), asu(l)))).unwrap(),
        }
    }
}

prop_compose! {
    fn arb_radio_map()(universe_size in 1..8usize)(
        universe_size in Just(universe_size),
        anchors in proptest::collection::vec(
            (
                0.0..25.0f64,
                0.0..25.0f64,
                proptest::collection::vec(0..=31u8, universe_size),
                any::<bool>(),
            ),
            0..20,
        ),
    ) -> RadioMap {
        let universe = TowerUniverse::new((0..universe_size).map(tid).collect()).unwrap();
        let bounds = Bounds::new(0.0, 0.0, 25.0, 25.0).unwrap();
        let anchors = anchors
            .into_iter()
            .map(|(x, y, levels, is_seed)| RadioMapAnchor {
                position: Position::new(x, y),
                vector: FeatureVector::new(levels.into_iter().map(asu).collect()),
                provenance: if is_seed { Provenance::Seed } else { Provenance::Synthetic },
            })
            .collect();
        RadioMap::new(universe, anchors, bounds).unwrap()
    }
}

proptest! {
    #[test]
    fn fingerprints_round_trip(fps in proptest::collection::vec(arb_fingerprint(), 0..25)) {
        let bytes = emit_fingerprints(&fps);
        prop_assert_eq!(parse_fingerprints(&bytes).unwrap(), fps);
    }

    #[test]
    fn emitted_fingerprints_are_byte_stable(fps in proptest::collection::vec(arb_fingerprint(), 0..10)) {
        prop_assert_eq!(emit_fingerprints(&fps), emit_fingerprints(&fps));
    }

    #[test]
    fn radio_maps_round_trip(map in arb_radio_map()) {
        let bytes = emit_radio_map(&map);
        prop_assert_eq!(parse_radio_map(&bytes).unwrap(), map);
    }

    #[test]
    fn estimates_round_trip(
        records in proptest::collection::vec(
            (0.0..30.0f64, 0.0..30.0f64, -500.0..500.0f64),
            0..30,
        ),
        probabilistic in any::<bool>(),
    ) {
        let engine = if probabilistic { Engine::Probabilistic } else { Engine::Knn };
        let estimates: Vec<LocalizationEstimate> = records
            .into_iter()
            .map(|(x, y, score)| LocalizationEstimate {
                position: Position::new(x, y),
                score,
                engine,
            })
            .collect();
        let bytes = emit_estimates(engine, &estimates);
        let (parsed_engine, parsed) = parse_estimates(&bytes).unwrap();
        prop_assert_eq!(parsed_engine, engine);
        prop_assert_eq!(parsed, estimates);
    }
}
