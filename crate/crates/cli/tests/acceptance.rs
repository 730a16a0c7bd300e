//! Acceptance suite: runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails. Run with `cargo test --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use asymboost::boost::{
    kkt_report, train, verify_kkt, Algorithm, BoostConfig, Booster, ColumnGeneration,
    EFFECTIVE_TOL, KKT_EDGE_TOL,
};
use asymboost::boxsolver::{minimize, SolveRequest, SolverSettings};
use asymboost::cascade::{
    cumulative_effective, effective_stump_table, train_cascade, CascadeConfig, CascadeStructure,
    DEFAULT_SCHEDULE,
};
use asymboost::data::{
    enumerate_haar, extract_haar, generate_ring, generate_ring_negatives, GrayImage, IntegralImage,
    RingSpec,
};
use asymboost::eval::{ksweep, KSweepParams};
use asymboost::hypothesis::ResponseMatrix;
use asymboost::losses::{edges, AsymmetryParams, CostConvention, PrimalObjective, Variant};
use asymboost::stumps::{best_stump, candidate_stumps};
use asymboost::{FeatureMatrix, LabeledDataset, Stump};
use common::{small_instance, tight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct SmallCase {
    seed: u64,
    algorithm: Algorithm,
    theta: f64,
    k: f64,
}

/// 24 instances with M in 40..=200 and at most 50 candidate stumps.
fn small_cases() -> Vec<SmallCase> {
    (0..24)
        .map(|i| SmallCase {
            seed: 100 + i,
            algorithm: if i % 2 == 0 {
                Algorithm::Tc1
            } else {
                Algorithm::Tc2
            },
            theta: [0.005, 0.02, 0.05][(i as usize / 2) % 3],
            k: [1.0, 2.0, 3.5, 0.5][(i as usize) % 4],
        })
        .collect()
}

fn small_data(seed: u64) -> LabeledDataset {
    let m = 40 + (seed as usize * 37) % 161;
    small_instance(seed, m, 3, 7)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (mut worst_gap, mut worst_edge) = (0.0f64, f64::NEG_INFINITY);
    let mut failures = Vec::new();
    let cases = small_cases();
    for case in &cases {
        let data = small_data(case.seed);
        let pool = candidate_stumps(data.features());
        if pool.len() > 50 || data.len() > 200 {
            failures.push(format!("seed {} exceeds the size limits", case.seed));
            continue;
        }
        let mut cg = ColumnGeneration::new(&data, &tight(case.algorithm, case.theta, case.k), None)
            .expect("valid config");
        cg.run().expect("training");
        let last = cg.trace().rounds.last().expect("one round");
        let gap = last.gap.expect("gap").abs() / (1.0 + last.primal.abs());
        let h = ResponseMatrix::from_stumps(&pool, data.features()).expect("responses");
        let excess = edges(&cg.state().u, data.labels(), &h)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
            - case.theta;
        worst_gap = worst_gap.max(gap);
        worst_edge = worst_edge.max(excess);
        if gap >= 1e-6 || excess > 1e-8 {
            failures.push(format!("seed {}", case.seed));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "{} instances, max relative gap {worst_gap:.2e}, max edge - theta {worst_edge:.2e}, \
             {:.1}s{}",
            cases.len(),
            elapsed.as_secs_f64(),
            fail_list(&failures)
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for case in small_cases() {
        let data = small_data(case.seed);
        let config = tight(case.algorithm, case.theta, case.k);
        let mut cg = ColumnGeneration::new(&data, &config, None).expect("valid config");
        cg.run().expect("training");
        let cg_value = cg.trace().rounds.last().expect("one round").primal;
        let pool = candidate_stumps(data.features());
        let h = ResponseMatrix::from_stumps(&pool, data.features()).expect("responses");
        let asym = AsymmetryParams::with_convention(case.k, config.convention).expect("k");
        let variant = case.algorithm.variant().expect("tc variant");
        let full = PrimalObjective::with_params(variant, case.theta, &asym, data.labels(), &h)
            .expect("objective");
        let req =
            SolveRequest::nonnegative(&full, vec![0.0; pool.len()]).with_settings(SolverSettings {
                tolerance: 1e-11,
                max_iterations: 50_000,
                memory_size: 10,
            });
        let direct = minimize(&req).expect("direct solve").value;
        let delta = (cg_value - direct).abs();
        worst = worst.max(delta);
        if delta >= 1e-6 {
            failures.push(format!("seed {}", case.seed));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "24 instances, max |delta objective| {worst:.2e}{}",
            fail_list(&failures)
        ),
    )
}

fn criterion_3() -> Outcome {
    const STEP: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let variant = if i % 2 == 0 {
            Variant::Tc1
        } else {
            Variant::Tc2
        };
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
        let h = ResponseMatrix::from_columns(m, columns).expect("columns");
        let convention = if rng.gen_bool(0.5) {
            CostConvention::PositiveCostlier
        } else {
            CostConvention::NegativeCostlier
        };
        let asym =
            AsymmetryParams::with_convention(rng.gen_range(0.2..8.0), convention).expect("k");
        let theta = rng.gen_range(1e-3..0.2);
        let f =
            PrimalObjective::with_params(variant, theta, &asym, &labels, &h).expect("objective");
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let g = f.gradient(&w).expect("gradient");
        for j in 0..n {
            let (mut plus, mut minus) = (w.clone(), w.clone());
            plus[j] += STEP;
            minus[j] -= STEP;
            let fd =
                (f.value(&plus).expect("value") - f.value(&minus).expect("value")) / (2.0 * STEP);
            let scale = g[j].abs().max(fd.abs()).max(1e-6);
            worst = worst.max((g[j] - fd).abs() / scale);
        }
    }
    outcome(
        worst < 1e-5,
        format!("50 pairs, max relative error {worst:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut models = 0;
    let mut violations = 0;
    let configs = (0..12u64).map(|seed| {
        let algorithm = if seed % 2 == 0 {
            Algorithm::Tc1
        } else {
            Algorithm::Tc2
        };
        (
            small_instance(500 + seed, 150, 4, 9),
            tight(algorithm, [0.003, 0.01, 0.03][seed as usize % 3], 2.5),
        )
    });
    let small = small_cases()
        .into_iter()
        .map(|c| (small_data(c.seed), tight(c.algorithm, c.theta, c.k)));
    for (data, config) in configs.chain(small) {
        let mut cg = ColumnGeneration::new(&data, &config, None).expect("valid config");
        cg.run().expect("training");
        let entries = kkt_report(&cg.ensemble(), &data, cg.state()).expect("report");
        violations += verify_kkt(&entries, KKT_EDGE_TOL, EFFECTIVE_TOL).len();
        models += 1;
    }

    let (small_theta, large_theta) = (0.005, 0.02);
    let mut sparser = 0;
    for trial in 0..10u64 {
        let data = small_instance(900 + trial, 200, 5, 15);
        let count = |theta: f64| {
            let (e, _) = train(&data, &tight(Algorithm::Tc1, theta, 1.5), None).expect("training");
            e.effective_count(EFFECTIVE_TOL)
        };
        if count(large_theta) <= count(small_theta) {
            sparser += 1;
        }
    }
    outcome(
        violations == 0 && sparser >= 9,
        format!(
            "{models} converged models, {violations} KKT violations; theta {small_theta} -> \
             {large_theta} no denser in {sparser}/10 trials"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for seed in 0..10u64 {
        let data = generate_ring(&RingSpec::new(150, 150, seed)).expect("ring");
        let config = BoostConfig {
            k: 1.0,
            theta: 0.01,
            max_weak: 40,
            ..BoostConfig::default()
        };
        let run = |algorithm| {
            train(
                &data,
                &BoostConfig {
                    algorithm,
                    ..config
                },
                None,
            )
            .expect("training")
        };
        let ((a, ta), (b, tb)) = (run(Algorithm::Tc1), run(Algorithm::Tc2));
        if a.stumps() != b.stumps() || ta.rounds.len() != tb.rounds.len() {
            failures.push(format!("seed {seed}"));
            continue;
        }
        for (ra, rb) in ta.rounds.iter().zip(&tb.rounds) {
            for (x, y) in ra.weights.iter().zip(&rb.weights) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    outcome(
        failures.is_empty() && worst <= 1e-9,
        format!(
            "10 ring datasets, identical stump sequences, max coefficient divergence {worst:.1e}{}",
            fail_list(&failures)
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let cases = 200;
    let mut mismatches = 0;
    for _ in 0..cases {
        let m = rng.gen_range(2..=64);
        let d = rng.gen_range(1..=16);
        let levels = rng.gen_range(1..=12u32);
        let values = (0..m * d)
            .map(|_| f64::from(rng.gen_range(0..levels)) * 0.25 - 1.0)
            .collect();
        let mut labels: Vec<i8> = (0..m)
            .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
            .collect();
        labels[0] = 1;
        labels[1] = -1;
        let u: Vec<f64> = (0..m).map(|_| rng.gen_range(1e-3..1.0)).collect();
        let data = LabeledDataset::new(FeatureMatrix::new(m, d, values).expect("matrix"), labels)
            .expect("dataset");
        let edge = |s: &Stump| -> f64 {
            (0..m)
                .map(|i| u[i] * f64::from(s.output(data.features().row(i)) * data.labels()[i]))
                .sum()
        };
        let best = best_stump(&data, &u, &HashSet::new()).expect("best stump");
        let max = candidate_stumps(data.features())
            .iter()
            .map(edge)
            .fold(f64::NEG_INFINITY, f64::max);
        if (best.edge - max).abs() > 1e-12 || (edge(&best.stump) - best.edge).abs() > 1e-12 {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{cases} random instances (M <= 64, D <= 16), {mismatches} mismatches"),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let params = KSweepParams::standard();
    let seeds = 1u64..=5;
    // (algorithm, k) -> summed (fnr, fpr) over seeds
    let mut sums: BTreeMap<(String, String), (f64, f64)> = BTreeMap::new();
    for seed in seeds.clone() {
        let data = generate_ring(&RingSpec::new(1000, 1000, seed)).expect("ring");
        let (train_set, test_set) = data.split_per_class(0.5).expect("split");
        for cell in ksweep(&train_set, &test_set, &params).expect("sweep") {
            let key = (
                cell.row.algorithm.name().to_string(),
                cell.row.k.map(|k| format!("{k:.1}")).unwrap_or_default(),
            );
            let e = sums.entry(key).or_default();
            e.0 += cell.row.false_negative_rate;
            e.1 += cell.row.false_positive_rate;
        }
    }
    let n = seeds.count() as f64;
    let mean = |alg: &str, k: &str| {
        let (fnr, fpr) = sums[&(alg.to_string(), k.to_string())];
        (fnr / n, fpr / n)
    };
    let (ada_fnr, ada_fpr) = mean("adaboost", "");
    let ks: Vec<String> = params.grid.iter().map(|k| format!("{k:.1}")).collect();
    let mut pass = true;
    let mut parts = vec![format!("AdaBoost FNR {ada_fnr:.4} FPR {ada_fpr:.4}")];
    for alg in ["tc1", "tc2"] {
        let mut beats = 0;
        let (base_fnr, base_fpr) = mean(alg, &ks[0]);
        let mut ordered = 0;
        let mut steps = 0;
        let mut prev = (base_fnr, base_fpr);
        for (i, k) in ks.iter().enumerate() {
            let (fnr, fpr) = mean(alg, k);
            if fnr < ada_fnr && fpr > ada_fpr {
                beats += 1;
            }
            if fnr <= base_fnr && fpr >= base_fpr {
                ordered += 1;
            }
            if i > 0 && fnr <= prev.0 && fpr >= prev.1 {
                steps += 1;
            }
            prev = (fnr, fpr);
        }
        let (fnr_hi, fpr_hi) = mean(alg, ks.last().expect("grid"));
        pass &= beats == ks.len() && ordered >= 8;
        parts.push(format!(
            "{alg}: below-baseline FNR and above-baseline FPR at {beats}/{} k, \
             ordered vs k=1.2 at {ordered}/{} (consecutive steps {steps}/{}), \
             k=1.2 FNR {base_fnr:.4} FPR {base_fpr:.4}, k=3.0 FNR {fnr_hi:.4} FPR {fpr_hi:.4}",
            ks.len(),
            ks.len(),
            ks.len() - 1
        ));
    }
    let elapsed = start.elapsed();
    parts.push(format!("{:.1}s", elapsed.as_secs_f64()));
    outcome(pass && elapsed < Duration::from_secs(600), parts.join("; "))
}

fn criterion_8() -> Outcome {
    let count = enumerate_haar(24, 24).len();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let images: Vec<GrayImage> = (0..2)
        .map(|_| GrayImage::new(24, 24, (0..576).map(|_| rng.gen()).collect()).expect("image"))
        .collect();
    let extracted = extract_haar(&images, &[1, -1], (24, 24))
        .expect("extraction")
        .dims();

    let (w, h) = (37, 29);
    let img = GrayImage::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).expect("image");
    let ii = IntegralImage::new(&img);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let x = rng.gen_range(0..w);
        let y = rng.gen_range(0..h);
        let rw = rng.gen_range(0..=w - x);
        let rh = rng.gen_range(0..=h - y);
        let naive: i64 = (y..y + rh)
            .flat_map(|yy| (x..x + rw).map(move |xx| (xx, yy)))
            .map(|(xx, yy)| i64::from(img.get(xx, yy)))
            .sum();
        if ii.rect_sum(x, y, rw, rh) != naive {
            mismatches += 1;
        }
    }
    outcome(
        count == 162_336 && extracted == 162_336 && mismatches == 0,
        format!(
            "24x24 window: {count} features enumerated, {extracted} extracted; \
             {mismatches}/1000 rectangle sums differ from naive sums"
        ),
    )
}

fn criterion_9() -> Outcome {
    let positives = generate_ring(&RingSpec::new(1000, 1000, 91))
        .expect("ring")
        .class_rows(1);
    let pool = generate_ring_negatives(&RingSpec::new(0, 20_000, 92)).expect("negatives");
    let cascade = |algorithm| {
        let config = CascadeConfig {
            boost: BoostConfig {
                algorithm,
                theta: 0.001,
                k: 7.0,
                ..BoostConfig::default()
            },
            schedule: DEFAULT_SCHEDULE.to_vec(),
            stop_at_targets: false,
            ..CascadeConfig::default()
        };
        train_cascade(&positives, &pool, &config, CascadeStructure::MultiExit).expect("cascade")
    };
    let tc = cascade(Algorithm::Tc1);
    let stagewise = cascade(Algorithm::AdaBoost);
    let total: usize = DEFAULT_SCHEDULE.iter().sum();
    let table = effective_stump_table(&tc).expect("table");
    let nodes = table.len();

    let mut diagonal_ok = true;
    let mut range_ok = true;
    let (mut decaying, mut columns) = (0, 0);
    for (j, row) in table.iter().enumerate() {
        diagonal_ok &= row[j].is_some_and(|v| (v - 1.0).abs() < 1e-12);
        let column: Vec<f64> = (j..nodes).filter_map(|i| table[i][j]).collect();
        range_ok &= column.iter().all(|v| (0.0..=1.0).contains(v));
        if column.len() >= 2 {
            columns += 1;
            if column.windows(2).all(|p| p[1] <= p[0] + 1e-12) {
                decaying += 1;
            }
        }
    }
    let tc_cum = cumulative_effective(&tc);
    let sw_cum = cumulative_effective(&stagewise);
    let matched = tc.nodes.len() == stagewise.nodes.len();
    let sparser = matched && tc_cum.iter().zip(&sw_cum).all(|(a, b)| a <= b);
    outcome(
        nodes <= 6 && total <= 200 && diagonal_ok && range_ok && 2 * decaying > columns && sparser,
        format!(
            "{nodes} nodes, {total} stumps scheduled; diagonal 1.0: {diagonal_ok}, values in \
             [0,1]: {range_ok}, decaying columns {decaying}/{columns}; cumulative effective \
             TC1 {tc_cum:?} vs AdaBoost {sw_cum:?}"
        ),
    )
}

fn run_cli(dir: &Path, threads: usize, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_asymboost"))
        .current_dir(dir)
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn cli_outputs(threads: usize) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let steps: &[&[&str]] = &[
        &[
            "gen", "--seed", "7", "--n-pos", "400", "--n-neg", "400", "--out", "ring.csv",
        ],
        &[
            "train",
            "--data",
            "ring.csv",
            "--variant",
            "tc2",
            "--k",
            "2",
            "--max-weak",
            "40",
        ],
        &[
            "train",
            "--data",
            "ring.csv",
            "--variant",
            "adaboost",
            "--max-weak",
            "40",
            "--name",
            "ada",
        ],
        &[
            "eval",
            "--model",
            "model.json",
            "--data",
            "ring.csv",
            "--mode",
            "roc",
        ],
        &[
            "eval",
            "--model",
            "model.json",
            "--data",
            "ring.csv",
            "--mode",
            "dr-at-fpr",
        ],
        &[
            "eval",
            "--model",
            "ada.json",
            "--data",
            "ring.csv",
            "--mode",
            "fpr-at-dr",
            "--format",
            "json",
        ],
        &[
            "cascade",
            "--data",
            "ring.csv",
            "--schedule",
            "5,10,15",
            "--variant",
            "tc1",
            "--k",
            "2",
            "--negatives-per-node",
            "100",
        ],
        &["eval", "--model", "cascade.json", "--data", "ring.csv"],
        &[
            "report",
            "--table",
            "effective-stumps",
            "--cascade",
            "cascade.json",
        ],
        &[
            "report",
            "--table",
            "kkt",
            "--model",
            "model.json",
            "--data",
            "ring.csv",
        ],
        &[
            "ksweep",
            "--data",
            "ring.csv",
            "--grid",
            "1.5,2.5",
            "--max-weak",
            "20",
            "--boundary",
            "boundary.csv",
        ],
    ];
    for args in steps {
        run_cli(d, threads, args)?;
    }
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(d).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        files.insert(
            path.file_name().unwrap().to_string_lossy().into_owned(),
            bytes,
        );
    }
    Ok(files)
}

fn criterion_10() -> Outcome {
    let runs: Result<Vec<_>, _> = [1, 4, 4].iter().map(|&t| cli_outputs(t)).collect();
    let runs = match runs {
        Ok(r) => r,
        Err(e) => return outcome(false, e),
    };
    let mut differing = Vec::new();
    for (name, bytes) in &runs[0] {
        if runs[1..].iter().any(|r| r.get(name) != Some(bytes)) {
            differing.push(name.clone());
        }
    }
    let same_names = runs[1..].iter().all(|r| r.keys().eq(runs[0].keys()));
    outcome(
        differing.is_empty() && same_names,
        format!(
            "{} output files of gen/train/eval/cascade/report/ksweep compared across \
             --threads 1, 4, 4{}",
            runs[0].len(),
            if differing.is_empty() {
                String::new()
            } else {
                format!("; differing: {differing:?}")
            }
        ),
    )
}

fn fail_list(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", failures.join(", "))
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("duality gap closure", criterion_1),
        ("full-primal oracle equivalence", criterion_2),
        ("gradient correctness", criterion_3),
        ("KKT and sparsity", criterion_4),
        ("k=1 degeneracy", criterion_5),
        ("weak-learner oracle", criterion_6),
        ("ring k-sweep trend", criterion_7),
        ("Haar conformance", criterion_8),
        ("multi-exit sparsity", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name} ({:.1}s): {}",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("{}/10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
