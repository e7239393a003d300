//! Exponential heating/cooling surrogate models and the coefficient registry.
//!
//! Each model describes one thermostat-plus-room combination under fixed
//! environmental conditions with two saturating exponentials, one per
//! actuation mode.  Anchored at a starting temperature `t0`, after `t`
//! minutes:
//!
//! ```text
//! on:  y = k_on1  * (1 - exp(-k_on2  * t)) + t0          (rises toward t0 + k_on1)
//! off: y = k_off1 *      exp(-k_off2 * t)  + t0 - k_off1 (falls toward t0 - k_off1)
//! ```
//!
//! All four coefficients are strictly positive; evaluation is pure and
//! safe to share across threads.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thermostat actuation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    On,
    Off,
}

impl Mode {
    pub fn flipped(self) -> Mode {
        match self {
            Mode::On => Mode::Off,
            Mode::Off => Mode::On,
        }
    }
}

/// One surrogate model: the four exponential coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCoefficients {
    pub model_id: u32,
    /// Heating temperature delta, degrees C. Asymptote of the on mode is `t0 + k_on1`.
    pub k_on1: f64,
    /// Heating decay rate, per minute.
    pub k_on2: f64,
    /// Cooling temperature delta, degrees C. Asymptote of the off mode is `t0 - k_off1`.
    pub k_off1: f64,
    /// Cooling decay rate, per minute.
    pub k_off2: f64,
}

impl ModelCoefficients {
    pub fn new(model_id: u32, k_on1: f64, k_on2: f64, k_off1: f64, k_off2: f64) -> Result<Self> {
        let coeffs = ModelCoefficients {
            model_id,
            k_on1,
            k_on2,
            k_off1,
            k_off2,
        };
        coeffs.validate()?;
        Ok(coeffs)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("k_on1", self.k_on1),
            ("k_on2", self.k_on2),
            ("k_off1", self.k_off1),
            ("k_off2", self.k_off2),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidCoefficient {
                    id: self.model_id,
                    name,
                    value,
                });
            }
        }
        Ok(())
    }

    /// Temperature after `t` minutes of heating from anchor `t0`.
    ///
    /// Strictly increasing in `t`, bounded above by `t0 + k_on1`.
    /// Panics if `t` is negative.
    pub fn eval_on(&self, t0: f64, t: f64) -> f64 {
        assert!(t >= 0.0, "elapsed time must be non-negative, got {t}");
        self.k_on1 * (1.0 - (-self.k_on2 * t).exp()) + t0
    }

    /// Temperature after `t` minutes of cooling from anchor `t0`.
    ///
    /// Strictly decreasing in `t`, bounded below by `t0 - k_off1`.
    /// Panics if `t` is negative.
    pub fn eval_off(&self, t0: f64, t: f64) -> f64 {
        assert!(t >= 0.0, "elapsed time must be non-negative, got {t}");
        // Grouped so that t = 0 returns t0 exactly.
        self.k_off1 * ((-self.k_off2 * t).exp() - 1.0) + t0
    }

    pub fn eval(&self, mode: Mode, t0: f64, t: f64) -> f64 {
        match mode {
            Mode::On => self.eval_on(t0, t),
            Mode::Off => self.eval_off(t0, t),
        }
    }

    /// Largest temperature change this model can produce in a single
    /// one-minute step from a fresh anchor.
    pub fn max_step_excursion(&self) -> f64 {
        let rise = self.k_on1 * (1.0 - (-self.k_on2).exp());
        let drop = self.k_off1 * (1.0 - (-self.k_off2).exp());
        rise.max(drop)
    }
}

/// Coefficient sets indexed by model id. Non-empty by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRegistry {
    models: BTreeMap<u32, ModelCoefficients>,
    ids: Vec<u32>,
}

impl ModelRegistry {
    pub fn from_models(models: impl IntoIterator<Item = ModelCoefficients>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for coeffs in models {
            coeffs.validate()?;
            if map.insert(coeffs.model_id, coeffs).is_some() {
                return Err(Error::DuplicateModel(coeffs.model_id));
            }
        }
        if map.is_empty() {
            return Err(Error::EmptyRegistry);
        }
        let ids = map.keys().copied().collect();
        Ok(ModelRegistry { models: map, ids })
    }

    /// The three coefficient sets shipped as the default registry.
    pub fn builtin() -> Self {
        let rows = [
            (1, 6.0, 0.14170703, 4.3, 0.09531917),
            (2, 7.9, 0.11180434, 5.2, 0.04803319),
            (3, 7.0, 0.13425024, 3.8, 0.07661568),
        ];
        let models = rows.map(|(id, k_on1, k_on2, k_off1, k_off2)| ModelCoefficients {
            model_id: id,
            k_on1,
            k_on2,
            k_off1,
            k_off2,
        });
        ModelRegistry::from_models(models).expect("builtin registry is valid")
    }

    pub fn get(&self, model_id: u32) -> Result<&ModelCoefficients> {
        self.models
            .get(&model_id)
            .ok_or(Error::UnknownModel(model_id))
    }

    pub fn contains(&self, model_id: u32) -> bool {
        self.models.contains_key(&model_id)
    }

    /// Model ids in ascending order.
    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn models(&self) -> impl Iterator<Item = &ModelCoefficients> {
        self.models.values()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest heating delta over all models.
    pub fn max_heat_delta(&self) -> f64 {
        self.models().map(|m| m.k_on1).fold(0.0, f64::max)
    }

    /// Largest cooling delta over all models.
    pub fn max_cool_delta(&self) -> f64 {
        self.models().map(|m| m.k_off1).fold(0.0, f64::max)
    }

    /// Largest one-minute excursion over all models.
    pub fn max_step_excursion(&self) -> f64 {
        self.models()
            .map(|m| m.max_step_excursion())
            .fold(0.0, f64::max)
    }
}
