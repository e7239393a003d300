//! Reference oracle for the acceptance suite: an independently written
//! straight-line simulator kept deliberately free of the library's
//! evaluation code.  Formulas are grouped differently from the
//! implementation on purpose; agreement is checked numerically, not
//! structurally.

/// Coefficients of one surrogate model, as the oracle sees them.
#[derive(Debug, Clone, Copy)]
pub struct RefModel {
    pub heat_delta: f64,
    pub heat_rate: f64,
    pub cool_delta: f64,
    pub cool_rate: f64,
}

/// Heating curve: approaches `anchor + heat_delta`.
pub fn heat(m: &RefModel, anchor: f64, minutes: f64) -> f64 {
    anchor + m.heat_delta - m.heat_delta * (-m.heat_rate * minutes).exp()
}

/// Cooling curve: approaches `anchor - cool_delta`.
pub fn cool(m: &RefModel, anchor: f64, minutes: f64) -> f64 {
    anchor - m.cool_delta + m.cool_delta * (-m.cool_rate * minutes).exp()
}

/// One schedule entry: hold `target` for `minutes` under `model`.
#[derive(Debug, Clone, Copy)]
pub struct RefState {
    pub target: f64,
    pub minutes: u32,
    pub model: RefModel,
}

/// Step the bang-bang controller over the schedule and return the RMS
/// deviation from the scheduled targets.
pub fn reference_fitness(schedule: &[RefState], initial: f64, hysteresis: f64) -> f64 {
    let mut current = initial;
    let mut sum_sq = 0.0;
    let mut count = 0u64;
    for state in schedule {
        let mut heating = current < state.target;
        let mut anchor = current;
        let mut elapsed = 0u32;
        for _ in 0..state.minutes {
            let next_heating = if current < state.target - hysteresis {
                true
            } else if current > state.target + hysteresis {
                false
            } else {
                heating
            };
            if next_heating != heating {
                heating = next_heating;
                anchor = current;
                elapsed = 0;
            }
            elapsed += 1;
            current = if heating {
                heat(&state.model, anchor, f64::from(elapsed))
            } else {
                cool(&state.model, anchor, f64::from(elapsed))
            };
            let deviation = current - state.target;
            sum_sq += deviation * deviation;
            count += 1;
        }
    }
    (sum_sq / count as f64).sqrt()
}
