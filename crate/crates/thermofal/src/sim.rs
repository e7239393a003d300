//! Minute-stepped thermostat simulation and the deviation fitness.
//!
//! The controller is bang-bang with a hysteresis band: within each
//! scenario state it heats when the room is below `target - hysteresis`,
//! idles when above `target + hysteresis`, and otherwise keeps its
//! previous actuation.  Every actuation change, and every state boundary,
//! re-anchors the active exponential at the current temperature with
//! local time reset to zero.
//!
//! Fitness is the root-mean-square deviation between the simulated trace
//! and the scheduled (expected) trace, in degrees C; larger means the
//! schedule drives the system further from what a user asked for.  The
//! deviation is stored positive; report sinks that want the
//! minimizing-framework sign flip it at the edge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::TestCase;
use crate::surrogate::{Mode, ModelRegistry};

/// A temperature signal on the uniform one-minute grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    values: Vec<f64>,
}

impl Trace {
    pub fn from_values(values: Vec<f64>) -> Self {
        Trace { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Root-mean-square difference against an equally long trace.
    pub fn rmse(&self, other: &Trace) -> f64 {
        assert_eq!(self.len(), other.len(), "traces must be aligned");
        assert!(!self.is_empty(), "rmse of empty traces is undefined");
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (sum / self.len() as f64).sqrt()
    }
}

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Room temperature at the start of the scenario, degrees C.
    pub initial_temp: f64,
    /// Half-width of the controller's dead band, degrees C.
    pub hysteresis: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            initial_temp: 20.0,
            hysteresis: 0.1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hysteresis.is_finite() && self.hysteresis >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "hysteresis must be non-negative, got {}",
                self.hysteresis
            )));
        }
        if !(0.0..=40.0).contains(&self.initial_temp) {
            return Err(Error::InvalidConfig(format!(
                "initial_temp must lie in [0, 40], got {}",
                self.initial_temp
            )));
        }
        Ok(())
    }
}

/// The scheduled behaviour: each state's target held for its duration,
/// one sample per minute.
pub fn expected_trace(tc: &TestCase) -> Trace {
    let mut values = Vec::with_capacity(tc.total_duration() as usize);
    for state in &tc.states {
        values.extend(std::iter::repeat_n(state.target_temp, state.duration as usize));
    }
    Trace::from_values(values)
}

/// Run the bang-bang controller over the schedule, one sample per minute.
pub fn simulate(tc: &TestCase, registry: &ModelRegistry, cfg: &SimConfig) -> Result<Trace> {
    cfg.validate()?;
    if tc.is_empty() {
        return Err(Error::EmptyTestCase);
    }
    let mut values = Vec::with_capacity(tc.total_duration() as usize);
    let mut current = cfg.initial_temp;
    for state in &tc.states {
        let coeffs = registry.get(state.model_id)?;
        let target = state.target_temp;

        // State boundary: pick an actuation (ties idle) and re-anchor.
        let mut actuation = if current < target { Mode::On } else { Mode::Off };
        let mut anchor = current;
        let mut local_t = 0u32;

        for _ in 0..state.duration {
            let desired = if current < target - cfg.hysteresis {
                Mode::On
            } else if current > target + cfg.hysteresis {
                Mode::Off
            } else {
                actuation
            };
            if desired != actuation {
                actuation = desired;
                anchor = current;
                local_t = 0;
            }
            local_t += 1;
            current = coeffs.eval(actuation, anchor, f64::from(local_t));
            values.push(current);
        }
    }
    Ok(Trace::from_values(values))
}

/// RMS deviation between simulated and expected behaviour, degrees C.
pub fn fitness(tc: &TestCase, registry: &ModelRegistry, cfg: &SimConfig) -> Result<f64> {
    let simulated = simulate(tc, registry, cfg)?;
    Ok(simulated.rmse(&expected_trace(tc)))
}
