use asymboost::hypothesis::ResponseMatrix;
use asymboost::losses::{edges, AsymmetryParams, CostConvention, PrimalObjective, Variant};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;

struct Instance {
    objective: PrimalObjective,
    labels: Vec<i8>,
    h: ResponseMatrix,
    w: Vec<f64>,
}

fn random_instance(rng: &mut ChaCha8Rng, variant: Variant) -> Instance {
    let m = rng.gen_range(10..=120);
    let n = rng.gen_range(1..=12);
    let mut labels: Vec<i8> = (0..m)
        .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
        .collect();
    labels[0] = 1;
    labels[1] = -1;
    let columns: Vec<Vec<i8>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
                .collect()
        })
        .collect();
    let h = ResponseMatrix::from_columns(m, columns).unwrap();
    let k = rng.gen_range(0.2..8.0);
    let convention = if rng.gen_bool(0.5) {
        CostConvention::PositiveCostlier
    } else {
        CostConvention::NegativeCostlier
    };
    let asym = AsymmetryParams::with_convention(k, convention).unwrap();
    let theta = rng.gen_range(1e-3..0.2);
    let objective = PrimalObjective::with_params(variant, theta, &asym, &labels, &h).unwrap();
    let w = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
    Instance {
        objective,
        labels,
        h,
        w,
    }
}

fn max_relative_error(objective: &PrimalObjective, w: &[f64]) -> f64 {
    let g = objective.gradient(w).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..w.len() {
        let mut plus = w.to_vec();
        let mut minus = w.to_vec();
        plus[j] += STEP;
        minus[j] -= STEP;
        let fd =
            (objective.value(&plus).unwrap() - objective.value(&minus).unwrap()) / (2.0 * STEP);
        let scale = g[j].abs().max(fd.abs()).max(1e-6);
        worst = worst.max((g[j] - fd).abs() / scale);
    }
    worst
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..50 {
        let variant = if i % 2 == 0 {
            Variant::Tc1
        } else {
            Variant::Tc2
        };
        let inst = random_instance(&mut rng, variant);
        let err = max_relative_error(&inst.objective, &inst.w);
        assert!(err < 1e-5, "pair {i}: relative error {err}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_is_midpoint_convex(seed in any::<u64>(), tc2 in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let variant = if tc2 { Variant::Tc2 } else { Variant::Tc1 };
        let Instance { objective, w: a, .. } = random_instance(&mut rng, variant);
        let b: Vec<f64> = a.iter().map(|_| rng.gen_range(0.0..2.0)).collect();
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect();
        let fa = objective.value(&a).unwrap();
        let fb = objective.value(&b).unwrap();
        let fm = objective.value(&mid).unwrap();
        prop_assert!(fm <= (fa + fb) / 2.0 + 1e-12);
    }

    #[test]
    fn gradient_is_theta_minus_edge(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, Variant::Tc2);
        let g = inst.objective.gradient(&inst.w).unwrap();
        let u = inst.objective.weights_at(&inst.w).unwrap();
        let e = edges(&u, &inst.labels, &inst.h);
        for (gj, ej) in g.iter().zip(&e) {
            prop_assert!((gj - (inst.objective.theta - ej)).abs() < 1e-12);
        }
    }
}
