//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (visible with `--nocapture`).
//!
//! Run with: `cargo test -p thermofal-cli --test acceptance -- --nocapture`

mod reference;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use reference::{RefModel, RefState};
use thermofal::evolve::{self, GaConfig};
use thermofal::format;
use thermofal::scenario::{self, GeneratorConfig, TestCase};
use thermofal::sim::{self, SimConfig};
use thermofal::surrogate::{Mode, ModelCoefficients, ModelRegistry};
use thermofal::sysid::{self, TraceSegment};

fn ref_model(c: &ModelCoefficients) -> RefModel {
    RefModel {
        heat_delta: c.k_on1,
        heat_rate: c.k_on2,
        cool_delta: c.k_off1,
        cool_rate: c.k_off2,
    }
}

fn ref_schedule(tc: &TestCase, registry: &ModelRegistry) -> Vec<RefState> {
    tc.states
        .iter()
        .map(|s| RefState {
            target: s.target_temp,
            minutes: s.duration,
            model: ref_model(registry.get(s.model_id).unwrap()),
        })
        .collect()
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn assert_runtime(elapsed: Duration, limit: Duration, criterion: &str) {
    assert!(
        elapsed < limit,
        "{criterion}: runtime {elapsed:?} exceeded limit {limit:?}"
    );
}

#[test]
fn criterion_1_model_fit_recovery() {
    let start = Instant::now();
    let registry = ModelRegistry::builtin();

    // Noiseless recovery, forward-generating with the oracle's curves.
    for &id in registry.ids() {
        let truth = *registry.get(id).unwrap();
        let rm = ref_model(&truth);
        let on_samples: Vec<(f64, f64)> = (0..60)
            .map(|m| (f64::from(m), reference::heat(&rm, 18.0, f64::from(m))))
            .collect();
        let off_samples: Vec<(f64, f64)> = (0..60)
            .map(|m| (f64::from(m), reference::cool(&rm, 25.0, f64::from(m))))
            .collect();
        let on = TraceSegment::new(Mode::On, on_samples).unwrap();
        let off = TraceSegment::new(Mode::Off, off_samples).unwrap();
        let fitted = sysid::fit_model(&on, &off, id).unwrap();
        for (got, want) in [
            (fitted.k_on1, truth.k_on1),
            (fitted.k_on2, truth.k_on2),
            (fitted.k_off1, truth.k_off1),
            (fitted.k_off2, truth.k_off2),
        ] {
            assert!(
                (got - want).abs() < 1e-3,
                "model {id}: recovered {got}, truth {want}"
            );
        }
    }

    // Noisy fits stay below half a degree rms across 20 seeds.
    let truth = *registry.get(1).unwrap();
    let rm = ref_model(&truth);
    let mut worst_rmse: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<(f64, f64)> = (0..60)
            .map(|m| {
                let y = reference::heat(&rm, 18.0, f64::from(m)) + 0.2 * gaussian(&mut rng);
                (f64::from(m), y)
            })
            .collect();
        let fit = sysid::fit_mode(&TraceSegment::new(Mode::On, samples).unwrap()).unwrap();
        assert!(fit.rmse <= 0.5, "seed {seed}: rmse {}", fit.rmse);
        worst_rmse = worst_rmse.max(fit.rmse);
    }

    assert_runtime(start.elapsed(), Duration::from_secs(10), "criterion 1");
    println!(
        "criterion 1 PASS: noiseless recovery < 1e-3 on all rows; worst noisy rmse {worst_rmse:.3} <= 0.5 ({:?})",
        start.elapsed()
    );
}

#[test]
fn criterion_2_dynamics_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let coeffs = ModelCoefficients {
            model_id: 1,
            k_on1: rng.random_range(0.1..20.0),
            k_on2: rng.random_range(0.01..1.0),
            k_off1: rng.random_range(0.1..20.0),
            k_off2: rng.random_range(0.01..1.0),
        };
        let rm = ref_model(&coeffs);
        let t0 = rng.random_range(-10.0..40.0);
        let t = rng.random_range(0.0..500.0);
        let on_diff = (coeffs.eval_on(t0, t) - reference::heat(&rm, t0, t)).abs();
        let off_diff = (coeffs.eval_off(t0, t) - reference::cool(&rm, t0, t)).abs();
        worst = worst.max(on_diff).max(off_diff);
    }
    assert!(worst <= 1e-12, "worst disagreement {worst}");
    assert_runtime(start.elapsed(), Duration::from_secs(1), "criterion 2");
    println!(
        "criterion 2 PASS: worst |impl - reference| = {worst:.2e} <= 1e-12 over 1000 points ({:?})",
        start.elapsed()
    );
}

#[test]
fn criterion_3_generator_validity() {
    let start = Instant::now();
    let cfg = GeneratorConfig::default();
    let registry = ModelRegistry::builtin();
    let cases = scenario::generate_population(10_000, &cfg, &registry, 3).unwrap();

    let mut switches = 0u64;
    let mut pairs = 0u64;
    for tc in &cases {
        assert!(tc.within_bounds(&cfg), "constraint violation: {tc:?}");
        let slack = (tc.total_duration() as i64 - i64::from(cfg.horizon)).unsigned_abs();
        assert!(slack <= tc.len() as u64, "horizon slack {slack} in {tc:?}");
        for w in tc.states.windows(2) {
            pairs += 1;
            if w[0].mode_hint != w[1].mode_hint {
                switches += 1;
            }
        }
    }
    let freq = switches as f64 / pairs as f64;
    assert!((freq - 0.9).abs() <= 0.03, "switch frequency {freq}");

    assert_runtime(start.elapsed(), Duration::from_secs(30), "criterion 3");
    println!(
        "criterion 3 PASS: 10000 cases valid; switch frequency {freq:.4} within 0.9 +/- 0.03 ({:?})",
        start.elapsed()
    );
}

#[test]
fn criterion_4_simulator_oracle_equivalence() {
    let start = Instant::now();
    let cfg = GeneratorConfig::default();
    let registry = ModelRegistry::builtin();
    let sim_cfg = SimConfig::default();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let tc = scenario::generate_test_case(
            &cfg,
            &registry,
            &mut scenario::individual_rng(400 + seed, 0),
        )
        .unwrap();
        let ours = sim::fitness(&tc, &registry, &sim_cfg).unwrap();
        let theirs = reference::reference_fitness(
            &ref_schedule(&tc, &registry),
            sim_cfg.initial_temp,
            sim_cfg.hysteresis,
        );
        worst = worst.max((ours - theirs).abs());
    }
    assert!(worst <= 1e-9, "worst fitness disagreement {worst}");
    println!(
        "criterion 4 PASS: worst |fitness - reference| = {worst:.2e} <= 1e-9 over 50 cases ({:?})",
        start.elapsed()
    );
}

#[test]
fn criterion_5_ga_dominance_scaled() {
    let start = Instant::now();
    let ga_cfg = GaConfig {
        generations: 20,
        evaluation_budget: Some(2000),
        rng_seed: 0,
        ..GaConfig::default()
    };
    let report = evolve::compare(
        10,
        &ga_cfg,
        &GeneratorConfig::default(),
        &ModelRegistry::builtin(),
        &SimConfig::default(),
        1,
    )
    .unwrap();

    let ga = report.ga_summary;
    let rs = report.rs_summary;
    assert!(
        ga.median > rs.median,
        "median GA {} must exceed median RS {}",
        ga.median,
        rs.median
    );
    assert!(
        ga.mean >= 1.5 * rs.mean,
        "mean GA {} must be >= 1.5 x mean RS {}",
        ga.mean,
        rs.mean
    );
    assert_runtime(start.elapsed(), Duration::from_secs(300), "criterion 5");
    println!(
        "criterion 5 PASS: GA mean {:.3} >= 1.5 x RS mean {:.3} (ratio {:.3}); medians {:.3} > {:.3} ({:?})",
        ga.mean,
        rs.mean,
        ga.mean / rs.mean,
        ga.median,
        rs.median,
        start.elapsed()
    );
}

#[test]
fn criterion_6_full_protocol_qualitative() {
    let start = Instant::now();
    let ga_cfg = GaConfig {
        rng_seed: 0,
        ..GaConfig::default() // generations 90, population 100, budget 9000
    };
    let report = evolve::compare(
        10,
        &ga_cfg,
        &GeneratorConfig::default(),
        &ModelRegistry::builtin(),
        &SimConfig::default(),
        777,
    )
    .unwrap();

    let pooled = report.pooled_summary.mean;
    assert!(
        (pooled - 0.93).abs() <= 0.5,
        "pooled random mean {pooled} outside 0.93 +/- 0.5"
    );
    assert!(
        (report.rs_summary.mean - 2.8).abs() <= 1.5,
        "random-search mean best {} outside 2.8 +/- 1.5",
        report.rs_summary.mean
    );
    assert!(
        pooled < report.rs_summary.mean && report.rs_summary.mean < report.ga_summary.mean,
        "mean ordering violated: {pooled} vs {} vs {}",
        report.rs_summary.mean,
        report.ga_summary.mean
    );
    assert!(
        report.pooled_summary.median < report.rs_summary.median
            && report.rs_summary.median < report.ga_summary.median,
        "median ordering violated"
    );
    for (i, run) in report.ga.iter().enumerate() {
        assert!(
            run.history.windows(2).all(|w| w[1].best >= w[0].best),
            "GA run {i} convergence is not monotone"
        );
        assert_eq!(run.history.len(), 90, "GA run {i} generations recorded");
        assert_eq!(run.evaluations_used, 9000, "GA run {i} budget");
    }

    assert_runtime(start.elapsed(), Duration::from_secs(1800), "criterion 6");
    println!(
        "criterion 6 PASS: pooled {pooled:.3} < RS bests {:.3} < GA bests {:.3}; all 10 histories monotone over 90 generations ({:?})",
        report.rs_summary.mean,
        report.ga_summary.mean,
        start.elapsed()
    );
}

fn thermofal(args: &[&str], dir: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_thermofal"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "thermofal {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Snapshot of every file under a directory, sorted by path.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn criterion_7_command_determinism() {
    let start = Instant::now();
    let dir = TempDir::new().unwrap();
    let root = dir.path();

    // Inputs: a synthetic noisy trace and a desk-scale manifest.
    let truth = *ModelRegistry::builtin().get(1).unwrap();
    let rm = ref_model(&truth);
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut trace = String::from("t_minutes,temperature_c,mode\n");
    let mut t = 0.0f64;
    for _ in 0..2 {
        for m in 0..120 {
            let y = reference::heat(&rm, 18.0, f64::from(m)) + 0.2 * gaussian(&mut rng);
            trace.push_str(&format!("{t},{y},on\n"));
            t += 1.0;
        }
        for m in 0..120 {
            let y = reference::cool(&rm, 24.0, f64::from(m)) + 0.2 * gaussian(&mut rng);
            trace.push_str(&format!("{t},{y},off\n"));
            t += 1.0;
        }
    }
    fs::write(root.join("trace.csv"), trace).unwrap();
    fs::write(
        root.join("ga.json"),
        r#"{
            "generations": 5,
            "population_size": 10,
            "mutation_rate": 0.4,
            "crossover_rate": 0.9,
            "tournament_k": 2,
            "rng_seed": 0,
            "evaluation_budget": 50
        }"#,
    )
    .unwrap();
    fs::write(
        root.join("manifest.json"),
        r#"{"ga_config": "ga.json", "out_dir": "out", "seed": 17}"#,
    )
    .unwrap();

    let rerun_identical = |label: &str, args: &[&str], outputs: &Path| {
        let first_out = thermofal(args, root);
        let first_files = snapshot(outputs);
        let second_out = thermofal(args, root);
        let second_files = snapshot(outputs);
        assert_eq!(first_out.stdout, second_out.stdout, "{label}: stdout differs");
        assert_eq!(first_files, second_files, "{label}: output bytes differ");
    };

    fs::create_dir_all(root.join("gen")).unwrap();
    fs::create_dir_all(root.join("fitted")).unwrap();
    fs::create_dir_all(root.join("simulated")).unwrap();

    rerun_identical(
        "fit",
        &["fit", "--trace", "trace.csv", "--out", "fitted/registry.json"],
        &root.join("fitted"),
    );
    rerun_identical(
        "generate",
        &["generate", "-n", "3", "--seed", "11", "--out", "gen"],
        &root.join("gen"),
    );
    rerun_identical(
        "simulate",
        &["simulate", "--test-case", "gen/tc_00000.json", "--out", "simulated/trace.csv"],
        &root.join("simulated"),
    );
    rerun_identical(
        "evolve",
        &["evolve", "--manifest", "manifest.json"],
        &root.join("out"),
    );
    rerun_identical(
        "random-search",
        &["random-search", "--manifest", "manifest.json", "--budget", "40"],
        &root.join("out"),
    );
    rerun_identical(
        "compare",
        &["compare", "--manifest", "manifest.json", "--runs", "2"],
        &root.join("out"),
    );
    let a = thermofal(&["print-default-config"], root);
    let b = thermofal(&["print-default-config"], root);
    assert_eq!(a.stdout, b.stdout, "print-default-config: stdout differs");

    println!(
        "criterion 7 PASS: all seven commands rerun byte-identically ({:?})",
        start.elapsed()
    );
}

#[test]
fn criterion_8_property_suites() {
    let start = Instant::now();
    let registry = ModelRegistry::builtin();
    let gen_cfg = GeneratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    // Surrogate asymptote, continuity, monotonicity, bounds.
    for _ in 0..1000 {
        let c = ModelCoefficients {
            model_id: 1,
            k_on1: rng.random_range(0.1..20.0),
            k_on2: rng.random_range(0.01..1.0),
            k_off1: rng.random_range(0.1..20.0),
            k_off2: rng.random_range(0.01..1.0),
        };
        let t0 = rng.random_range(-10.0..40.0);
        assert_eq!(c.eval_on(t0, 0.0), t0);
        assert_eq!(c.eval_off(t0, 0.0), t0);
        let phase1 = rng.random_range(0.0..8.0);
        let phase2 = phase1 + rng.random_range(0.05..8.0);
        assert!(c.eval_on(t0, phase2 / c.k_on2) > c.eval_on(t0, phase1 / c.k_on2));
        assert!(c.eval_off(t0, phase2 / c.k_off2) < c.eval_off(t0, phase1 / c.k_off2));
        for phase in [phase1, phase2, 1000.0] {
            let on = c.eval_on(t0, phase / c.k_on2);
            assert!(on >= t0 && on <= t0 + c.k_on1);
            let off = c.eval_off(t0, phase / c.k_off2);
            assert!(off <= t0 && off >= t0 - c.k_off1);
        }
    }

    // Operator gene conservation and multiset preservation.
    for i in 0..200u64 {
        let a = scenario::generate_test_case(&gen_cfg, &registry, &mut scenario::individual_rng(800, i)).unwrap();
        let b = scenario::generate_test_case(&gen_cfg, &registry, &mut scenario::individual_rng(801, i)).unwrap();
        let point = 1 + (i as usize) % (a.len().min(b.len()) - 1);
        let (c1, c2) = evolve::crossover_one_point(&a, &b, point).unwrap();
        assert_eq!(c1.len() + c2.len(), a.len() + b.len());

        let mut mutated = a.clone();
        assert!(evolve::mutate_exchange(&mut mutated, &mut rng));
        let key = |s: &thermofal::ScenarioState| (s.target_temp.to_bits(), s.duration, s.model_id);
        let mut before: Vec<_> = a.states.iter().map(key).collect();
        let mut after: Vec<_> = mutated.states.iter().map(key).collect();
        before.sort_unstable();
        after.sort_unstable();
        assert_eq!(before, after, "exchange changed the state multiset");
    }

    // Round-trip serialization of documents, registries, and configs.
    for i in 0..100u64 {
        let tc = scenario::generate_test_case(&gen_cfg, &registry, &mut scenario::individual_rng(900, i)).unwrap();
        let json = format::test_case_to_json(&tc);
        let parsed = format::parse_test_case(json.as_bytes()).unwrap();
        assert_eq!(parsed, tc.strip_hints());
        assert_eq!(format::test_case_to_json(&parsed), json);
    }
    let reg_json = format::registry_to_json(&registry);
    assert_eq!(format::parse_registry(reg_json.as_bytes()).unwrap(), registry);
    let bundle = format::ConfigBundle::default();
    let bundle_json = format::config_bundle_to_json(&bundle);
    assert_eq!(format::parse_config_bundle(bundle_json.as_bytes()).unwrap(), bundle);

    // Objective gradient against central finite differences.
    let truth = *registry.get(2).unwrap();
    let rm = ref_model(&truth);
    let mut noisy = ChaCha8Rng::seed_from_u64(88);
    let samples: Vec<(f64, f64)> = (0..50)
        .map(|m| {
            let y = reference::heat(&rm, 17.0, f64::from(m)) + 0.2 * gaussian(&mut noisy);
            (f64::from(m), y)
        })
        .collect();
    let seg = TraceSegment::new(Mode::On, samples).unwrap();
    for _ in 0..10 {
        let k1 = rng.random_range(0.5..15.0);
        let k2 = rng.random_range(0.02..0.5);
        let g = sysid::objective_gradient(&seg, k1, k2);
        let h1 = k1 * 1e-6;
        let h2 = k2 * 1e-6;
        let fd1 =
            (sysid::objective(&seg, k1 + h1, k2) - sysid::objective(&seg, k1 - h1, k2)) / (2.0 * h1);
        let fd2 =
            (sysid::objective(&seg, k1, k2 + h2) - sysid::objective(&seg, k1, k2 - h2)) / (2.0 * h2);
        assert!((g[0] - fd1).abs() / fd1.abs().max(1.0) < 1e-5);
        assert!((g[1] - fd2).abs() / fd2.abs().max(1.0) < 1e-5);
    }

    println!(
        "criterion 8 PASS: surrogate bounds, operator conservation, round-trips, gradient check ({:?})",
        start.elapsed()
    );
}
