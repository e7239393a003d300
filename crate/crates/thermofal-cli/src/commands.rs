use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use thermofal::evolve::{self, EvolutionResult, GaConfig};
use thermofal::format;
use thermofal::scenario::{generate_population, GeneratorConfig};
use thermofal::sim::{self, SimConfig};
use thermofal::surrogate::{Mode, ModelRegistry};
use thermofal::sysid;

pub fn fit(trace_path: &Path, out_path: &Path) -> Result<()> {
    let bytes = fs::read(trace_path).with_context(|| format!("reading {}", trace_path.display()))?;
    let samples = format::parse_raw_trace(&bytes)
        .with_context(|| format!("parsing {}", trace_path.display()))?;
    let (segments, dropped) = sysid::segment_raw_trace(&samples)?;
    if dropped > 0 {
        eprintln!("warning: dropped {dropped} segment(s) shorter than 3 samples");
    }

    // Pair on/off segments in order of appearance: the i-th heating run
    // and the i-th cooling run describe the same conditions.
    let on_segments: Vec<_> = segments.iter().filter(|s| s.mode() == Mode::On).collect();
    let off_segments: Vec<_> = segments.iter().filter(|s| s.mode() == Mode::Off).collect();
    let pairs = on_segments.len().min(off_segments.len());
    if pairs == 0 {
        bail!(
            "no complete on/off segment pair in {} ({} on, {} off)",
            trace_path.display(),
            on_segments.len(),
            off_segments.len()
        );
    }
    if on_segments.len() != off_segments.len() {
        eprintln!(
            "warning: unpaired segments ignored ({} on, {} off)",
            on_segments.len(),
            off_segments.len()
        );
    }

    let mut models = Vec::with_capacity(pairs);
    for i in 0..pairs {
        let id = (i + 1) as u32;
        let (coeffs, on_fit, off_fit) =
            sysid::fit_model_detailed(on_segments[i], off_segments[i], id)
                .with_context(|| format!("fitting model {id}"))?;
        println!(
            "model {id}: k_on1={:.8} k_on2={:.8} k_off1={:.8} k_off2={:.8} \
             rmse_on={:.4} rmse_off={:.4}",
            coeffs.k_on1, coeffs.k_on2, coeffs.k_off1, coeffs.k_off2, on_fit.rmse, off_fit.rmse
        );
        if !(on_fit.converged && off_fit.converged) {
            eprintln!("warning: model {id} fit did not fully converge");
        }
        models.push(coeffs);
    }

    let registry = ModelRegistry::from_models(models)?;
    write_file(out_path, format::registry_to_json(&registry))?;
    println!("wrote {} model(s) to {}", registry.len(), out_path.display());
    Ok(())
}

pub fn generate(
    config_path: Option<&Path>,
    registry_path: Option<&Path>,
    count: usize,
    seed: Option<u64>,
    out_dir: &Path,
) -> Result<()> {
    if count == 0 {
        bail!("n must be >= 1");
    }
    let cfg = load_generator_config(config_path)?;
    let registry = load_registry(registry_path)?;
    let seed = seed.unwrap_or(cfg.rng_seed);

    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let population = generate_population(count, &cfg, &registry, seed)?;
    for (i, tc) in population.iter().enumerate() {
        let path = out_dir.join(format!("tc_{i:05}.json"));
        write_file(&path, format::test_case_to_json(tc))?;
    }
    println!("wrote {count} test case(s) to {} (seed {seed})", out_dir.display());
    Ok(())
}

pub fn simulate(
    test_case_path: &Path,
    registry_path: Option<&Path>,
    config_path: Option<&Path>,
    out_path: &Path,
) -> Result<()> {
    let bytes =
        fs::read(test_case_path).with_context(|| format!("reading {}", test_case_path.display()))?;
    let tc = format::parse_test_case(&bytes)
        .with_context(|| format!("parsing {}", test_case_path.display()))?;
    let registry = load_registry(registry_path)?;
    let cfg = load_sim_config(config_path)?;

    let simulated = sim::simulate(&tc, &registry, &cfg)?;
    let expected = sim::expected_trace(&tc);
    let deviation = simulated.rmse(&expected);
    write_file(out_path, format::trace_export_csv(&expected, &simulated))?;
    println!(
        "fitness_rmse_c: {deviation} (paper-sign: {})",
        -deviation
    );
    println!("wrote {}-minute trace to {}", simulated.len(), out_path.display());
    Ok(())
}

#[derive(Serialize)]
struct RunSummary<'a> {
    method: &'a str,
    seed: u64,
    config_hash: &'a str,
    best_fitness: f64,
    best_fitness_paper_sign: f64,
    evaluations_used: usize,
    generations_recorded: usize,
}

fn write_run_outputs(run: &ResolvedRun, method: &str, result: &EvolutionResult) -> Result<()> {
    fs::create_dir_all(&run.out_dir)
        .with_context(|| format!("creating {}", run.out_dir.display()))?;
    write_file(
        &run.out_dir.join("best.json"),
        format::test_case_to_json(&result.best),
    )?;
    write_file(
        &run.out_dir.join("history.csv"),
        format::history_to_csv(&result.history),
    )?;
    let summary = RunSummary {
        method,
        seed: result.seed,
        config_hash: &run.config_hash,
        best_fitness: result.best_fitness,
        best_fitness_paper_sign: -result.best_fitness,
        evaluations_used: result.evaluations_used,
        generations_recorded: result.history.len(),
    };
    write_file(
        &run.out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    println!(
        "{method}: best fitness {} after {} evaluations ({} generations recorded)",
        result.best_fitness, result.evaluations_used, result.history.len()
    );
    println!("outputs in {}", run.out_dir.display());
    Ok(())
}

pub fn evolve(manifest_path: &Path, seed: Option<u64>) -> Result<()> {
    let run = resolve_manifest(manifest_path, seed)?;
    let result = evolve::run_ga(&run.ga, &run.generator, &run.registry, &run.sim)?;
    write_run_outputs(&run, "ga", &result)
}

pub fn random_search(manifest_path: &Path, budget: Option<usize>, seed: Option<u64>) -> Result<()> {
    let run = resolve_manifest(manifest_path, seed)?;
    let budget = budget
        .or(run.ga.evaluation_budget)
        .unwrap_or(run.ga.generations * run.ga.population_size);
    let result =
        evolve::run_random_search(budget, &run.generator, &run.registry, &run.sim, run.seed)?;
    write_run_outputs(&run, "random_search", &result)
}

pub fn compare(manifest_path: &Path, runs: usize, seed: Option<u64>) -> Result<()> {
    let run = resolve_manifest(manifest_path, seed)?;
    let report = evolve::compare(
        runs,
        &run.ga,
        &run.generator,
        &run.registry,
        &run.sim,
        run.seed,
    )?;

    fs::create_dir_all(&run.out_dir)
        .with_context(|| format!("creating {}", run.out_dir.display()))?;
    write_file(
        &run.out_dir.join("comparison_runs.csv"),
        format::comparison_runs_csv(&report),
    )?;
    write_file(
        &run.out_dir.join("comparison_summary.json"),
        format::comparison_summary_json(&report),
    )?;

    println!(
        "ga best:    mean {:.4} median {:.4} (paper-sign mean {:.4})",
        report.ga_summary.mean, report.ga_summary.median, -report.ga_summary.mean
    );
    println!(
        "rs best:    mean {:.4} median {:.4} (paper-sign mean {:.4})",
        report.rs_summary.mean, report.rs_summary.median, -report.rs_summary.mean
    );
    println!(
        "rs pooled:  mean {:.4} over {} individuals",
        report.pooled_summary.mean, report.pooled_summary.n
    );
    println!(
        "rank-sum diagnostic (normal approximation): U={} z={:.3} p={:.3e}",
        report.rank_test.u, report.rank_test.z, report.rank_test.p_value
    );
    println!("outputs in {}", run.out_dir.display());
    Ok(())
}

pub fn print_default_config(out: Option<&Path>) -> Result<()> {
    let json = format::config_bundle_to_json(&format::ConfigBundle::default());
    match out {
        Some(path) => write_file(path, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

/// A manifest with every referenced file loaded and seeds applied.
struct ResolvedRun {
    registry: ModelRegistry,
    generator: GeneratorConfig,
    ga: GaConfig,
    sim: SimConfig,
    out_dir: PathBuf,
    seed: u64,
    config_hash: String,
}

fn resolve_manifest(manifest_path: &Path, seed_override: Option<u64>) -> Result<ResolvedRun> {
    let bytes =
        fs::read(manifest_path).with_context(|| format!("reading {}", manifest_path.display()))?;
    let mut manifest = format::parse_manifest(&bytes)
        .with_context(|| format!("parsing {}", manifest_path.display()))?;
    if let Some(seed) = seed_override {
        manifest.seed = seed;
    }
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &PathBuf| -> PathBuf {
        if p.is_absolute() {
            p.clone()
        } else {
            base.join(p)
        }
    };

    for (label, path) in [
        ("registry", &manifest.registry),
        ("generator_config", &manifest.generator_config),
        ("ga_config", &manifest.ga_config),
        ("sim_config", &manifest.sim_config),
    ] {
        if let Some(p) = path {
            let full = resolve(p);
            if !full.exists() {
                bail!("manifest {label} path does not exist: {}", full.display());
            }
        }
    }

    let registry = load_registry(manifest.registry.as_ref().map(resolve).as_deref())?;
    let mut generator =
        load_generator_config(manifest.generator_config.as_ref().map(resolve).as_deref())?;
    let mut ga = load_ga_config(manifest.ga_config.as_ref().map(resolve).as_deref())?;
    let sim = load_sim_config(manifest.sim_config.as_ref().map(resolve).as_deref())?;

    // The manifest seed is the run seed.
    generator.rng_seed = manifest.seed;
    ga.rng_seed = manifest.seed;

    let bundle = format::ConfigBundle {
        generator: generator.clone(),
        ga: ga.clone(),
        sim,
    };
    let mut hasher = Sha256::new();
    hasher.update(format::config_bundle_to_json(&bundle).as_bytes());
    hasher.update(format::registry_to_json(&registry).as_bytes());
    let config_hash: String = hasher
        .finalize()
        .iter()
        .map(|b| std::format!("{b:02x}"))
        .collect();

    Ok(ResolvedRun {
        registry,
        generator,
        ga,
        sim,
        out_dir: resolve(&manifest.out_dir),
        seed: manifest.seed,
        config_hash,
    })
}

fn load_registry(path: Option<&Path>) -> Result<ModelRegistry> {
    match path {
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            format::parse_registry(&bytes).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(ModelRegistry::builtin()),
    }
}

fn load_generator_config(path: Option<&Path>) -> Result<GeneratorConfig> {
    match path {
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            format::parse_generator_config(&bytes)
                .with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(GeneratorConfig::default()),
    }
}

fn load_ga_config(path: Option<&Path>) -> Result<GaConfig> {
    match path {
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            format::parse_ga_config(&bytes).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(GaConfig::default()),
    }
}

fn load_sim_config(path: Option<&Path>) -> Result<SimConfig> {
    match path {
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            format::parse_sim_config(&bytes).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(SimConfig::default()),
    }
}

fn write_file(path: &Path, contents: String) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
