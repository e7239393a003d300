//! Genetic search over variable-length test cases, a random-search
//! baseline, and the harness that compares the two.
//!
//! The search maximizes the simulation deviation of [`crate::sim::fitness`].
//! One run is fully determined by its configuration and seed: every
//! stochastic choice is drawn from a seeded stream before fitness
//! evaluation, so results do not depend on evaluation order.

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{
    fit_durations_to_horizon, generate_population, generate_test_case, individual_rng,
    GeneratorConfig, TestCase,
};
use crate::sim::{fitness, SimConfig};
use crate::stats::{summarize, rank_sum_test, RankSumTest, SeriesSummary};
use crate::surrogate::ModelRegistry;

/// Genetic algorithm parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub generations: usize,
    pub population_size: usize,
    /// Per-offspring probability of applying one mutation operator.
    pub mutation_rate: f64,
    /// Per-pair probability of recombining instead of cloning.
    pub crossover_rate: f64,
    pub tournament_k: usize,
    pub rng_seed: u64,
    /// Cap on total fitness evaluations, counting the initial population.
    pub evaluation_budget: Option<usize>,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            generations: 90,
            population_size: 100,
            mutation_rate: 0.4,
            crossover_rate: 0.9,
            tournament_k: 2,
            rng_seed: 0,
            evaluation_budget: Some(9000),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.generations < 1 {
            return bad("generations must be >= 1".into());
        }
        if self.population_size < 2 {
            return bad("population_size must be >= 2".into());
        }
        for (name, rate) in [
            ("mutation_rate", self.mutation_rate),
            ("crossover_rate", self.crossover_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return bad(format!("{name} must lie in [0, 1], got {rate}"));
            }
        }
        if self.tournament_k < 1 {
            return bad("tournament_k must be >= 1".into());
        }
        if let Some(budget) = self.evaluation_budget {
            if budget < self.population_size {
                return bad(format!(
                    "evaluation_budget {budget} cannot cover the initial population of {}",
                    self.population_size
                ));
            }
        }
        Ok(())
    }

    fn budget(&self) -> usize {
        self.evaluation_budget
            .unwrap_or(self.generations * self.population_size)
    }
}

/// Best/mean fitness of the surviving population of one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub best: f64,
    pub mean: f64,
}

/// Outcome of one search run (genetic or random).
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub best: TestCase,
    pub best_fitness: f64,
    /// One entry per recorded generation, the initial population included.
    pub history: Vec<GenerationStats>,
    pub evaluations_used: usize,
    pub seed: u64,
    /// Configuration in effect; for random search only the seed and
    /// budget fields are meaningful.
    pub config: GaConfig,
}

/// Index of the tournament winner: `k` draws with replacement, maximal
/// fitness wins, ties go to the lowest population index.
pub fn tournament_select(fitnesses: &[f64], k: usize, rng: &mut impl Rng) -> usize {
    assert!(!fitnesses.is_empty(), "tournament over empty population");
    assert!(k >= 1, "tournament size must be >= 1");
    let mut best = rng.random_range(0..fitnesses.len());
    for _ in 1..k {
        let challenger = rng.random_range(0..fitnesses.len());
        if fitnesses[challenger] > fitnesses[best]
            || (fitnesses[challenger] == fitnesses[best] && challenger < best)
        {
            best = challenger;
        }
    }
    best
}

/// One-point crossover: children swap tails at `point`.
///
/// Children are returned un-repaired so gene conservation is observable;
/// run [`repair`] before evaluating them.
pub fn crossover_one_point(a: &TestCase, b: &TestCase, point: usize) -> Result<(TestCase, TestCase)> {
    if point < 1 || point >= a.len().min(b.len()) {
        return Err(Error::CrossoverPoint {
            point,
            a: a.len(),
            b: b.len(),
        });
    }
    let mut child1 = a.states[..point].to_vec();
    child1.extend_from_slice(&b.states[point..]);
    let mut child2 = b.states[..point].to_vec();
    child2.extend_from_slice(&a.states[point..]);
    Ok((TestCase::new(child1), TestCase::new(child2)))
}

/// Swap two distinct randomly chosen states in place.
///
/// Returns false (and leaves the case untouched) when there is nothing to
/// exchange.
pub fn mutate_exchange(tc: &mut TestCase, rng: &mut impl Rng) -> bool {
    let n = tc.len();
    if n < 2 {
        return false;
    }
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    tc.states.swap(i, j);
    true
}

/// Resample one field (target, duration, or model) of one randomly chosen
/// state within its admissible range.
///
/// Duration changes re-fit the whole schedule to the horizon.  Returns
/// false when the drawn change has no effect (single-model registry).
pub fn mutate_change_variable(
    tc: &mut TestCase,
    rng: &mut impl Rng,
    cfg: &GeneratorConfig,
    registry: &ModelRegistry,
) -> Result<bool> {
    if tc.is_empty() {
        return Ok(false);
    }
    let idx = rng.random_range(0..tc.len());
    match rng.random_range(0..3u8) {
        0 => {
            let raw: f64 = rng.random_range(cfg.temp_bounds.0..=cfg.temp_bounds.1);
            tc.states[idx].target_temp = (raw * 10.0).round() / 10.0;
        }
        1 => {
            tc.states[idx].duration =
                rng.random_range(cfg.duration_bounds.0..=cfg.duration_bounds.1);
            let mut durations: Vec<u32> = tc.states.iter().map(|s| s.duration).collect();
            fit_durations_to_horizon(&mut durations, cfg.horizon, cfg.duration_bounds)?;
            for (state, d) in tc.states.iter_mut().zip(durations) {
                state.duration = d;
            }
        }
        _ => {
            if registry.len() < 2 {
                return Ok(false);
            }
            let current = tc.states[idx].model_id;
            let others: Vec<u32> = registry
                .ids()
                .iter()
                .copied()
                .filter(|&id| id != current)
                .collect();
            tc.states[idx].model_id = others[rng.random_range(0..others.len())];
        }
    }
    Ok(true)
}

/// Restore the generation-time invariants after search operators: clamp
/// the state count into bounds (truncating, or padding by duplicating the
/// final state) and re-fit durations to the horizon.
pub fn repair(tc: &mut TestCase, cfg: &GeneratorConfig) -> Result<()> {
    let (n_lo, n_hi) = cfg.state_count_bounds;
    if tc.is_empty() {
        return Err(Error::EmptyTestCase);
    }
    if tc.len() > n_hi {
        tc.states.truncate(n_hi);
    }
    while tc.len() < n_lo {
        let last = *tc.states.last().expect("non-empty");
        tc.states.push(last);
    }
    let mut durations: Vec<u32> = tc.states.iter().map(|s| s.duration).collect();
    fit_durations_to_horizon(&mut durations, cfg.horizon, cfg.duration_bounds)?;
    for (state, d) in tc.states.iter_mut().zip(durations) {
        state.duration = d;
    }
    Ok(())
}

// Operational draws use a stream index no population individual can reach.
const OPERATOR_STREAM: u64 = u64::MAX;

/// Run the genetic algorithm: tournament selection, one-point crossover,
/// the two mutation operators chosen uniformly, and elitist
/// keep-the-best survival over parents and offspring combined.
pub fn run_ga(
    ga_cfg: &GaConfig,
    gen_cfg: &GeneratorConfig,
    registry: &ModelRegistry,
    sim_cfg: &SimConfig,
) -> Result<EvolutionResult> {
    ga_cfg.validate()?;
    gen_cfg.validate()?;
    sim_cfg.validate()?;

    let seed = ga_cfg.rng_seed;
    let budget = ga_cfg.budget();
    let pop_size = ga_cfg.population_size;
    let mut rng = individual_rng(seed, OPERATOR_STREAM);

    let mut population = generate_population(pop_size, gen_cfg, registry, seed)?;
    let mut fitnesses = population
        .iter()
        .map(|tc| fitness(tc, registry, sim_cfg))
        .collect::<Result<Vec<f64>>>()?;
    let mut evaluations = pop_size;

    sort_by_fitness(&mut population, &mut fitnesses);
    let mut history = vec![stats_of(&fitnesses)];

    for _generation in 1..ga_cfg.generations {
        if evaluations >= budget {
            break;
        }
        let room = budget - evaluations;
        let wanted = pop_size.min(room);

        let mut offspring = Vec::with_capacity(wanted);
        while offspring.len() < wanted {
            let i = tournament_select(&fitnesses, ga_cfg.tournament_k, &mut rng);
            let j = tournament_select(&fitnesses, ga_cfg.tournament_k, &mut rng);
            let shortest = population[i].len().min(population[j].len());
            let (mut c1, mut c2) =
                if shortest >= 2 && rng.random_bool(ga_cfg.crossover_rate) {
                    let point = rng.random_range(1..shortest);
                    crossover_one_point(&population[i], &population[j], point)?
                } else {
                    (population[i].clone(), population[j].clone())
                };
            for child in [&mut c1, &mut c2] {
                if rng.random_bool(ga_cfg.mutation_rate) {
                    if rng.random_bool(0.5) {
                        mutate_exchange(child, &mut rng);
                    } else {
                        mutate_change_variable(child, &mut rng, gen_cfg, registry)?;
                    }
                }
                repair(child, gen_cfg)?;
                debug_assert!(child.within_bounds(gen_cfg), "repaired child violates bounds");
            }
            offspring.push(c1);
            if offspring.len() < wanted {
                offspring.push(c2);
            }
        }

        for child in offspring {
            let f = fitness(&child, registry, sim_cfg)?;
            population.push(child);
            fitnesses.push(f);
        }
        evaluations += wanted;

        // Elitist truncation; the stable sort keeps parents ahead of
        // offspring on ties so survival is deterministic.
        sort_by_fitness(&mut population, &mut fitnesses);
        population.truncate(pop_size);
        fitnesses.truncate(pop_size);
        history.push(stats_of(&fitnesses));
    }

    Ok(EvolutionResult {
        best: population[0].clone(),
        best_fitness: fitnesses[0],
        history,
        evaluations_used: evaluations,
        seed,
        config: ga_cfg.clone(),
    })
}

fn sort_by_fitness(population: &mut Vec<TestCase>, fitnesses: &mut Vec<f64>) {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]));
    *population = order.iter().map(|&i| population[i].clone()).collect();
    *fitnesses = order.iter().map(|&i| fitnesses[i]).collect();
}

fn stats_of(fitnesses: &[f64]) -> GenerationStats {
    GenerationStats {
        best: fitnesses.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: fitnesses.iter().sum::<f64>() / fitnesses.len() as f64,
    }
}

/// Evaluations per random-search history window.
const RS_WINDOW: usize = 100;

/// Evaluate `budget` chain-generated test cases and keep the fittest.
///
/// The history records the running best and the window mean once per
/// [`RS_WINDOW`] evaluations.
pub fn run_random_search(
    budget: usize,
    gen_cfg: &GeneratorConfig,
    registry: &ModelRegistry,
    sim_cfg: &SimConfig,
    seed: u64,
) -> Result<EvolutionResult> {
    run_random_search_with_samples(budget, gen_cfg, registry, sim_cfg, seed).map(|(r, _)| r)
}

/// As [`run_random_search`], also returning every individual's fitness.
pub fn run_random_search_with_samples(
    budget: usize,
    gen_cfg: &GeneratorConfig,
    registry: &ModelRegistry,
    sim_cfg: &SimConfig,
    seed: u64,
) -> Result<(EvolutionResult, Vec<f64>)> {
    if budget < 1 {
        return Err(Error::InvalidConfig("budget must be >= 1".into()));
    }
    gen_cfg.validate()?;
    sim_cfg.validate()?;

    let mut best: Option<(TestCase, f64)> = None;
    let mut samples = Vec::with_capacity(budget);
    let mut history = Vec::new();
    let mut window_start = 0usize;

    for i in 0..budget {
        let tc = generate_test_case(gen_cfg, registry, &mut individual_rng(seed, i as u64))?;
        let f = fitness(&tc, registry, sim_cfg)?;
        samples.push(f);
        if best.as_ref().is_none_or(|(_, bf)| f > *bf) {
            best = Some((tc, f));
        }
        if (i + 1) % RS_WINDOW == 0 || i + 1 == budget {
            let window = &samples[window_start..];
            history.push(GenerationStats {
                best: best.as_ref().expect("at least one evaluation").1,
                mean: window.iter().sum::<f64>() / window.len() as f64,
            });
            window_start = samples.len();
        }
    }

    let (best, best_fitness) = best.expect("budget >= 1");
    let result = EvolutionResult {
        best,
        best_fitness,
        history,
        evaluations_used: budget,
        seed,
        config: GaConfig {
            rng_seed: seed,
            evaluation_budget: Some(budget),
            ..GaConfig::default()
        },
    };
    Ok((result, samples))
}

/// SplitMix64 step; the standard one-shot seed scrambler.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Deterministic sub-seed for run `index` of a multi-run experiment.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

/// Paired multi-run comparison of the genetic algorithm against random
/// search on equal budgets and derived seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub runs: usize,
    pub base_seed: u64,
    pub budget: usize,
    pub ga: Vec<EvolutionResult>,
    pub rs: Vec<EvolutionResult>,
    /// Fitness of every random individual across all runs, pooled.
    pub pooled_random: Vec<f64>,
    pub ga_summary: SeriesSummary,
    pub rs_summary: SeriesSummary,
    pub pooled_summary: SeriesSummary,
    /// Rank-sum comparison of GA bests vs RS bests (diagnostic).
    pub rank_test: RankSumTest,
}

impl ComparisonReport {
    pub fn ga_bests(&self) -> Vec<f64> {
        self.ga.iter().map(|r| r.best_fitness).collect()
    }

    pub fn rs_bests(&self) -> Vec<f64> {
        self.rs.iter().map(|r| r.best_fitness).collect()
    }
}

pub fn compare(
    runs: usize,
    ga_cfg: &GaConfig,
    gen_cfg: &GeneratorConfig,
    registry: &ModelRegistry,
    sim_cfg: &SimConfig,
    base_seed: u64,
) -> Result<ComparisonReport> {
    if runs < 2 {
        return Err(Error::InvalidConfig("comparison needs at least 2 runs".into()));
    }
    ga_cfg.validate()?;
    let budget = ga_cfg.budget();

    let mut ga = Vec::with_capacity(runs);
    let mut rs = Vec::with_capacity(runs);
    let mut pooled_random = Vec::with_capacity(runs * budget);
    for run in 0..runs {
        let ga_seed = derive_seed(base_seed, 2 * run as u64);
        let rs_seed = derive_seed(base_seed, 2 * run as u64 + 1);
        let run_cfg = GaConfig {
            rng_seed: ga_seed,
            ..ga_cfg.clone()
        };
        ga.push(run_ga(&run_cfg, gen_cfg, registry, sim_cfg)?);
        let (result, samples) =
            run_random_search_with_samples(budget, gen_cfg, registry, sim_cfg, rs_seed)?;
        rs.push(result);
        pooled_random.extend(samples);
    }

    let ga_bests: Vec<f64> = ga.iter().map(|r| r.best_fitness).collect();
    let rs_bests: Vec<f64> = rs.iter().map(|r| r.best_fitness).collect();
    Ok(ComparisonReport {
        runs,
        base_seed,
        budget,
        ga_summary: summarize(&ga_bests),
        rs_summary: summarize(&rs_bests),
        pooled_summary: summarize(&pooled_random),
        rank_test: rank_sum_test(&ga_bests, &rs_bests),
        ga,
        rs,
        pooled_random,
    })
}
