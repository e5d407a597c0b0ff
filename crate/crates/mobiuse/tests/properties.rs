use mobiuse::checkpoint;
use mobiuse::report::{key_value, parse_key_value};
use mobiuse_core::{Geometry, MetricReport, ModelState, NormKind, RingSpec};
use proptest::prelude::*;

fn geometry(i: usize) -> Geometry {
    let all = [
        Geometry::mobius(RingSpec::MOBIUS_2),
        Geometry::mobius(RingSpec::new(5, 3).unwrap()).with_norm(NormKind::L2),
        Geometry::torus(),
        Geometry::euclidean().with_norm(NormKind::L2),
    ];
    all[i % all.len()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn checkpoint_bytes_round_trip(g in 0usize..4, dim in 1usize..6, ne in 0usize..20, nr in 0usize..5, seed in any::<u64>()) {
        let state = ModelState::new(geometry(g), dim, ne, nr, seed).unwrap();
        let bytes = checkpoint::to_bytes(&state);
        let back = checkpoint::from_bytes(&bytes).unwrap();
        prop_assert_eq!(checkpoint::to_bytes(&back), bytes.clone());
        prop_assert_eq!(back, state);
    }

    #[test]
    fn any_truncation_is_rejected(seed in any::<u64>(), cut in 0.0..1.0f64) {
        let state = ModelState::new(geometry(0), 3, 6, 2, seed).unwrap();
        let bytes = checkpoint::to_bytes(&state);
        let keep = ((bytes.len() - 1) as f64 * cut) as usize;
        prop_assert!(checkpoint::from_bytes(&bytes[..keep]).is_err());
    }

    #[test]
    fn metric_report_key_value_round_trip(ranks in prop::collection::vec(1.0..500.0f64, 1..50)) {
        let ranks: Vec<f64> = ranks.into_iter().map(|r| (r * 2.0).round() / 2.0).collect();
        let report = MetricReport::from_ranks(ranks).unwrap();
        prop_assert_eq!(parse_key_value(&key_value(&report)).unwrap(), report);
    }
}
