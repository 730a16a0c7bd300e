use std::collections::HashSet;

use asymboost::stumps::{best_stump, candidate_stumps};
use asymboost::{FeatureMatrix, LabeledDataset, Stump};
use proptest::prelude::*;

fn brute_edge(stump: &Stump, data: &LabeledDataset, u: &[f64]) -> f64 {
    (0..data.len())
        .map(|i| {
            let h = stump.output(data.features().row(i));
            u[i] * f64::from(h * data.labels()[i])
        })
        .sum()
}

fn instance() -> impl Strategy<Value = (LabeledDataset, Vec<f64>)> {
    (2usize..=64, 1usize..=16, 1u32..=12).prop_flat_map(|(m, d, levels)| {
        (
            proptest::collection::vec(0..levels, m * d),
            proptest::collection::vec(any::<bool>(), m),
            proptest::collection::vec(1e-3f64..1.0, m),
        )
            .prop_map(move |(cells, signs, u)| {
                let values = cells.iter().map(|&c| f64::from(c) * 0.25 - 1.0).collect();
                let mut labels: Vec<i8> = signs.iter().map(|&s| if s { 1 } else { -1 }).collect();
                labels[0] = 1;
                labels[1] = -1;
                let f = FeatureMatrix::new(m, d, values).unwrap();
                (LabeledDataset::new(f, labels).unwrap(), u)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn best_stump_matches_enumeration((data, u) in instance()) {
        let best = best_stump(&data, &u, &HashSet::new()).unwrap();
        let pool = candidate_stumps(data.features());
        let max = pool
            .iter()
            .map(|s| brute_edge(s, &data, &u))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(pool.contains(&best.stump));
        prop_assert!((best.edge - max).abs() < 1e-12);
        prop_assert!((brute_edge(&best.stump, &data, &u) - best.edge).abs() < 1e-12);
    }

    #[test]
    fn excluded_stumps_are_skipped((data, u) in instance(), drop in 1usize..6) {
        let pool = candidate_stumps(data.features());
        let mut excluded = HashSet::new();
        let mut remaining: Vec<Stump> = pool.clone();
        for _ in 0..drop.min(pool.len() - 1) {
            let best = best_stump(&data, &u, &excluded).unwrap();
            prop_assert!(!excluded.contains(&best.stump.key()));
            excluded.insert(best.stump.key());
            remaining.retain(|s| s.key() != best.stump.key());
            let rest_max = remaining
                .iter()
                .map(|s| brute_edge(s, &data, &u))
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(best.edge >= rest_max - 1e-12);
        }
    }

    #[test]
    fn result_independent_of_thread_count((data, u) in instance()) {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| best_stump(&data, &u, &HashSet::new()).unwrap());
        let b = four.install(|| best_stump(&data, &u, &HashSet::new()).unwrap());
        prop_assert_eq!(a, b);
    }
}

#[test]
fn every_excluded_is_exhaustion() {
    let f = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
    let data = LabeledDataset::new(f, vec![1, -1]).unwrap();
    let excluded = candidate_stumps(data.features())
        .iter()
        .map(|s| s.key())
        .collect();
    assert!(matches!(
        best_stump(&data, &[0.5, 0.5], &excluded),
        Err(asymboost::Error::WeakLearnerExhausted)
    ));
}
