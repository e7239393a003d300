//! Markov-chain scenario generation.
//!
//! A usage scenario walks a two-state chain (heating expected / cooling
//! expected); each visited state emits one [`ScenarioState`] triplet of
//! target temperature, duration, and surrogate model.  Durations are then
//! fitted to the scenario horizon so the schedule covers exactly one
//! simulated day by default.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surrogate::{Mode, ModelRegistry};

/// One schedule entry: hold `target_temp` for `duration` minutes, with the
/// room behaving per `model_id`.
///
/// `mode_hint` records which Markov state emitted the entry.  It is
/// generation metadata only: the simulator derives actual actuation from
/// temperatures, and serialized documents do not carry it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioState {
    pub target_temp: f64,
    pub duration: u32,
    pub model_id: u32,
    pub mode_hint: Option<Mode>,
}

/// An ordered sequence of scenario states; the unit of search.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestCase {
    pub states: Vec<ScenarioState>,
}

impl TestCase {
    pub fn new(states: Vec<ScenarioState>) -> Self {
        TestCase { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Total scheduled minutes.
    pub fn total_duration(&self) -> u64 {
        self.states.iter().map(|s| u64::from(s.duration)).sum()
    }

    /// Copy with generation metadata removed, as after a document round-trip.
    pub fn strip_hints(&self) -> TestCase {
        TestCase {
            states: self
                .states
                .iter()
                .map(|s| ScenarioState {
                    mode_hint: None,
                    ..*s
                })
                .collect(),
        }
    }

    /// True when every state and the case length sit inside the generator
    /// bounds (the admissible-input constraint).
    pub fn within_bounds(&self, cfg: &GeneratorConfig) -> bool {
        let (t_lo, t_hi) = cfg.temp_bounds;
        let (d_lo, d_hi) = cfg.duration_bounds;
        let (n_lo, n_hi) = cfg.state_count_bounds;
        (n_lo..=n_hi).contains(&self.len())
            && self.states.iter().all(|s| {
                (t_lo..=t_hi).contains(&s.target_temp) && (d_lo..=d_hi).contains(&s.duration)
            })
    }
}

/// Parameters of the scenario generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Probability that consecutive Markov states differ.
    pub p_switch: f64,
    /// Probability of the self-loop; must complement `p_switch`.
    pub p_stay: f64,
    /// Admissible target temperatures, degrees C, inclusive.
    pub temp_bounds: (f64, f64),
    /// Admissible per-state durations, minutes, inclusive.
    pub duration_bounds: (u32, u32),
    /// Admissible number of states per test case, inclusive.
    pub state_count_bounds: (usize, usize),
    /// Total scheduled minutes per test case.
    pub horizon: u32,
    pub rng_seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            p_switch: 0.9,
            p_stay: 0.1,
            temp_bounds: (16.0, 25.0),
            duration_bounds: (15, 360),
            state_count_bounds: (5, 12),
            horizon: 1440,
            rng_seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.p_switch) || !(0.0..=1.0).contains(&self.p_stay) {
            return bad(format!(
                "probabilities must lie in [0, 1]: p_switch = {}, p_stay = {}",
                self.p_switch, self.p_stay
            ));
        }
        if (self.p_switch + self.p_stay - 1.0).abs() > 1e-9 {
            return bad(format!(
                "p_switch + p_stay must equal 1, got {}",
                self.p_switch + self.p_stay
            ));
        }
        if !(self.temp_bounds.0.is_finite() && self.temp_bounds.1.is_finite())
            || self.temp_bounds.0 > self.temp_bounds.1
        {
            return bad(format!("temp_bounds not ordered: {:?}", self.temp_bounds));
        }
        if self.duration_bounds.0 == 0 || self.duration_bounds.0 > self.duration_bounds.1 {
            return bad(format!(
                "duration_bounds must be ordered and positive: {:?}",
                self.duration_bounds
            ));
        }
        if self.state_count_bounds.0 == 0 || self.state_count_bounds.0 > self.state_count_bounds.1
        {
            return bad(format!(
                "state_count_bounds must be ordered and positive: {:?}",
                self.state_count_bounds
            ));
        }
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        Ok(())
    }
}

/// Rescale durations in place so they sum to exactly `horizon` while each
/// stays inside `bounds`.
///
/// Proportional scaling is applied iteratively: entries that a scaling
/// pass would push past a bound are pinned there and the remaining
/// horizon is redistributed over the rest, which converges in at most
/// `n` passes.  The integer remainder left by rounding is absorbed from
/// the last state backwards.  Infeasible combinations (`n * lo > horizon`
/// or `n * hi < horizon`) are an error.
pub fn fit_durations_to_horizon(
    durations: &mut [u32],
    horizon: u32,
    bounds: (u32, u32),
) -> Result<()> {
    let n = durations.len();
    let (lo, hi) = bounds;
    let infeasible = Error::HorizonInfeasible { n, lo, hi, horizon };
    if n == 0
        || (n as u64) * u64::from(lo) > u64::from(horizon)
        || (n as u64) * u64::from(hi) < u64::from(horizon)
    {
        return Err(infeasible);
    }

    // Continuous phase: proportional water-filling.
    let mut value: Vec<f64> = durations.iter().map(|&d| f64::from(d)).collect();
    let mut pinned: Vec<Option<u32>> = vec![None; n];
    loop {
        let pinned_sum: u64 = pinned.iter().flatten().map(|&d| u64::from(d)).sum();
        let free: Vec<usize> = (0..n).filter(|&i| pinned[i].is_none()).collect();
        if free.is_empty() {
            break;
        }
        let remaining = horizon as f64 - pinned_sum as f64;
        let free_sum: f64 = free.iter().map(|&i| value[i]).sum();
        let scale = if free_sum > 0.0 {
            remaining / free_sum
        } else {
            // All-zero free durations cannot occur from valid inputs, but
            // share equally rather than divide by zero.
            for &i in &free {
                value[i] = remaining / free.len() as f64;
            }
            1.0
        };
        let mut changed = false;
        for &i in &free {
            let scaled = value[i] * scale;
            if scaled < f64::from(lo) {
                pinned[i] = Some(lo);
                changed = true;
            } else if scaled > f64::from(hi) {
                pinned[i] = Some(hi);
                changed = true;
            }
        }
        if !changed {
            for &i in &free {
                value[i] *= scale;
            }
            break;
        }
    }

    for i in 0..n {
        durations[i] = match pinned[i] {
            Some(d) => d,
            None => (value[i].round() as u32).clamp(lo, hi),
        };
    }

    // Absorb the rounding remainder from the last state backwards.
    let sum: i64 = durations.iter().map(|&d| i64::from(d)).sum();
    let mut remainder = i64::from(horizon) - sum;
    for d in durations.iter_mut().rev() {
        if remainder == 0 {
            break;
        }
        let room = if remainder > 0 {
            i64::from(hi) - i64::from(*d)
        } else {
            i64::from(lo) - i64::from(*d)
        };
        let step = remainder.clamp(room.min(0), room.max(0));
        *d = (i64::from(*d) + step) as u32;
        remainder -= step;
    }
    debug_assert_eq!(remainder, 0, "feasible horizon must be absorbed exactly");
    Ok(())
}

/// Generate one test case by walking the two-state chain.
pub fn generate_test_case(
    cfg: &GeneratorConfig,
    registry: &ModelRegistry,
    rng: &mut impl Rng,
) -> Result<TestCase> {
    cfg.validate()?;
    let n = rng.random_range(cfg.state_count_bounds.0..=cfg.state_count_bounds.1);

    let mut states = Vec::with_capacity(n);
    let mut mode = if rng.random_bool(0.5) { Mode::On } else { Mode::Off };
    for i in 0..n {
        if i > 0 && rng.random_bool(cfg.p_switch) {
            mode = mode.flipped();
        }
        // Targets are sampled continuously and reported at 0.1 degree
        // resolution.
        let raw: f64 = rng.random_range(cfg.temp_bounds.0..=cfg.temp_bounds.1);
        let target_temp = (raw * 10.0).round() / 10.0;
        let duration = rng.random_range(cfg.duration_bounds.0..=cfg.duration_bounds.1);
        let model_id = registry.ids()[rng.random_range(0..registry.len())];
        states.push(ScenarioState {
            target_temp,
            duration,
            model_id,
            mode_hint: Some(mode),
        });
    }

    let mut durations: Vec<u32> = states.iter().map(|s| s.duration).collect();
    fit_durations_to_horizon(&mut durations, cfg.horizon, cfg.duration_bounds)?;
    for (state, d) in states.iter_mut().zip(durations) {
        state.duration = d;
    }
    Ok(TestCase::new(states))
}

/// Deterministic per-individual random stream: one seed, one stream index.
pub fn individual_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Generate `n` independent test cases from per-individual sub-streams of
/// `seed`; byte-for-byte reproducible and independent of evaluation order.
pub fn generate_population(
    n: usize,
    cfg: &GeneratorConfig,
    registry: &ModelRegistry,
    seed: u64,
) -> Result<Vec<TestCase>> {
    if n == 0 {
        return Err(Error::InvalidConfig("population count must be >= 1".into()));
    }
    (0..n)
        .map(|i| generate_test_case(cfg, registry, &mut individual_rng(seed, i as u64)))
        .collect()
}
