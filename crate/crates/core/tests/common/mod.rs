#![allow(dead_code)]

use asymboost::boost::{Algorithm, BoostConfig};
use asymboost::boxsolver::SolverSettings;
use asymboost::{FeatureMatrix, LabeledDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small instance with integer features in `0..levels`, so the stump pool has
/// `dims * (levels + 1) * 2` members at most. Labels follow a noisy linear rule
/// and both classes are always present.
pub fn small_instance(seed: u64, m: usize, dims: usize, levels: u32) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    let coef: Vec<f64> = (0..dims).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let centre = f64::from(levels - 1) / 2.0;
    for i in 0..m {
        let row: Vec<f64> = (0..dims)
            .map(|_| f64::from(rng.gen_range(0..levels)))
            .collect();
        let s: f64 = row.iter().zip(&coef).map(|(x, c)| (x - centre) * c).sum();
        let noisy = s + rng.gen_range(-1.0..1.0);
        let y = match i {
            0 => 1,
            1 => -1,
            _ if noisy >= 0.0 => 1,
            _ => -1,
        };
        rows.push(row);
        labels.push(y);
    }
    LabeledDataset::new(FeatureMatrix::from_rows(&rows).unwrap(), labels).unwrap()
}

/// Configuration converged tightly enough for 1e-6 level comparisons.
pub fn tight(algorithm: Algorithm, theta: f64, k: f64) -> BoostConfig {
    BoostConfig {
        algorithm,
        theta,
        k,
        epsilon: 1e-10,
        max_weak: 1000,
        solver: SolverSettings {
            tolerance: 1e-11,
            max_iterations: 20_000,
            memory_size: 10,
        },
        ..BoostConfig::default()
    }
}
