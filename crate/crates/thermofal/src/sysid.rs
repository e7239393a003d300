//! Coefficient estimation from recorded temperature traces.
//!
//! A raw trace is a time-ordered series of (minute, temperature, mode)
//! samples.  It is cut into per-mode segments at every mode change, and
//! each segment is fitted to the matching exponential of
//! [`ModelCoefficients`](crate::surrogate::ModelCoefficients) by
//! Levenberg-Marquardt over the two free coefficients, with the anchor
//! temperature taken from the segment's first sample.  An on/off segment
//! pair combines into one full model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surrogate::{Mode, ModelCoefficients};

/// Minimum samples per segment: two unknowns still leave a residual check.
pub const MIN_SEGMENT_SAMPLES: usize = 3;

/// One row of a raw trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub t_minutes: f64,
    pub temperature_c: f64,
    pub mode: Mode,
}

/// A contiguous run of samples in a single mode, re-based so the first
/// sample sits at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSegment {
    mode: Mode,
    samples: Vec<(f64, f64)>,
}

impl TraceSegment {
    pub fn new(mode: Mode, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < MIN_SEGMENT_SAMPLES {
            return Err(Error::InsufficientSamples(samples.len()));
        }
        if samples[0].0 != 0.0 {
            return Err(Error::SegmentNotRebased(samples[0].0));
        }
        for (i, pair) in samples.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::NonMonotonicTime(i + 1));
            }
        }
        Ok(TraceSegment { mode, samples })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Anchor temperature: the first sample's value.
    pub fn t0(&self) -> f64 {
        self.samples[0].1
    }
}

/// Outcome of fitting one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub k1: f64,
    pub k2: f64,
    /// Root-mean-square residual at the optimum, degrees C.
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
}

// Solver settings: stop on relative objective decrease below this, or at
// the iteration cap, whichever first.
const REL_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 200;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e12;

/// Model value at one sample time for the given mode and parameters.
fn predict(mode: Mode, t0: f64, k1: f64, k2: f64, t: f64) -> f64 {
    match mode {
        Mode::On => k1 * (1.0 - (-k2 * t).exp()) + t0,
        Mode::Off => k1 * (-k2 * t).exp() + t0 - k1,
    }
}

/// Partial derivatives of the model value with respect to (k1, k2).
fn jacobian_row(mode: Mode, k1: f64, k2: f64, t: f64) -> [f64; 2] {
    let e = (-k2 * t).exp();
    match mode {
        Mode::On => [1.0 - e, k1 * t * e],
        Mode::Off => [e - 1.0, -k1 * t * e],
    }
}

/// Sum of squared residuals of the segment against parameters (k1, k2).
pub fn objective(segment: &TraceSegment, k1: f64, k2: f64) -> f64 {
    let t0 = segment.t0();
    segment
        .samples
        .iter()
        .map(|&(t, y)| {
            let r = predict(segment.mode, t0, k1, k2, t) - y;
            r * r
        })
        .sum()
}

/// Analytic gradient of [`objective`] with respect to (k1, k2).
pub fn objective_gradient(segment: &TraceSegment, k1: f64, k2: f64) -> [f64; 2] {
    let t0 = segment.t0();
    let mut g = [0.0, 0.0];
    for &(t, y) in &segment.samples {
        let r = predict(segment.mode, t0, k1, k2, t) - y;
        let j = jacobian_row(segment.mode, k1, k2, t);
        g[0] += 2.0 * r * j[0];
        g[1] += 2.0 * r * j[1];
    }
    g
}

/// Fit the two free coefficients of the segment's mode equation by
/// Levenberg-Marquardt with analytic Jacobians.
///
/// Non-convergence within the iteration cap is not an error: the best
/// parameters seen are returned with `converged = false`.
pub fn fit_mode(segment: &TraceSegment) -> Result<FitResult> {
    let ys: Vec<f64> = segment.samples.iter().map(|&(_, y)| y).collect();
    if ys.iter().all(|&y| y == ys[0]) {
        return Err(Error::DegenerateSegment);
    }

    // k1 starts at the observed span, k2 mid-range of plausible decay rates.
    let k1_init = (ys[ys.len() - 1] - ys[0]).abs().max(0.1);
    let (mut k1, mut k2) = (k1_init, 0.1);
    let mut best = objective(segment, k1, k2);
    let mut lambda = LAMBDA_INIT;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        iterations += 1;

        // Normal equations (J^T J + lambda * diag(J^T J)) delta = -J^T r.
        let t0 = segment.t0();
        let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
        let (mut g1, mut g2) = (0.0, 0.0);
        for &(t, y) in &segment.samples {
            let r = predict(segment.mode, t0, k1, k2, t) - y;
            let [j1, j2] = jacobian_row(segment.mode, k1, k2, t);
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            g1 += j1 * r;
            g2 += j2 * r;
        }

        let m11 = a11 * (1.0 + lambda);
        let m22 = a22 * (1.0 + lambda);
        let det = m11 * m22 - a12 * a12;
        if det.abs() < f64::EPSILON * (m11 * m22).abs().max(f64::MIN_POSITIVE) {
            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                break;
            }
            continue;
        }
        let dk1 = (-g1 * m22 + g2 * a12) / det;
        let dk2 = (-g2 * m11 + g1 * a12) / det;

        let trial = objective(segment, k1 + dk1, k2 + dk2);
        if trial.is_finite() && trial < best {
            k1 += dk1;
            k2 += dk2;
            let decrease = (best - trial) / best.max(f64::MIN_POSITIVE);
            best = trial;
            lambda = (lambda / 10.0).max(1e-12);
            if decrease < REL_TOL {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                // Damping saturated: no direction improves the objective,
                // which is as converged as this surface allows.
                converged = true;
                break;
            }
        }
    }

    Ok(FitResult {
        k1,
        k2,
        rmse: (best / segment.samples.len() as f64).sqrt(),
        iterations,
        converged,
    })
}

/// Fit one full model from an on-mode and an off-mode segment.
pub fn fit_model(
    on_segment: &TraceSegment,
    off_segment: &TraceSegment,
    model_id: u32,
) -> Result<ModelCoefficients> {
    fit_model_detailed(on_segment, off_segment, model_id).map(|(coeffs, _, _)| coeffs)
}

/// As [`fit_model`], also returning the per-mode fit diagnostics.
pub fn fit_model_detailed(
    on_segment: &TraceSegment,
    off_segment: &TraceSegment,
    model_id: u32,
) -> Result<(ModelCoefficients, FitResult, FitResult)> {
    if on_segment.mode() != Mode::On {
        return Err(Error::ModeMismatch {
            expected: Mode::On,
            got: on_segment.mode(),
        });
    }
    if off_segment.mode() != Mode::Off {
        return Err(Error::ModeMismatch {
            expected: Mode::Off,
            got: off_segment.mode(),
        });
    }
    let on = fit_mode(on_segment)?;
    let off = fit_mode(off_segment)?;
    for (name, value) in [
        ("k_on1", on.k1),
        ("k_on2", on.k2),
        ("k_off1", off.k1),
        ("k_off2", off.k2),
    ] {
        if value <= 0.0 {
            return Err(Error::NegativeFit { name, value });
        }
    }
    let coeffs = ModelCoefficients::new(model_id, on.k1, on.k2, off.k1, off.k2)?;
    Ok((coeffs, on, off))
}

/// Split a raw trace at every mode change into re-based segments.
///
/// Segments shorter than [`MIN_SEGMENT_SAMPLES`] are dropped; the second
/// element of the return value counts them.
pub fn segment_raw_trace(raw: &[RawSample]) -> Result<(Vec<TraceSegment>, usize)> {
    if raw.is_empty() {
        return Err(Error::EmptyTrace);
    }
    for (i, pair) in raw.windows(2).enumerate() {
        if pair[1].t_minutes <= pair[0].t_minutes {
            return Err(Error::NonMonotonicTime(i + 1));
        }
    }

    let mut segments = Vec::new();
    let mut dropped = 0usize;
    let mut start = 0usize;
    for end in 1..=raw.len() {
        let boundary = end == raw.len() || raw[end].mode != raw[start].mode;
        if !boundary {
            continue;
        }
        let run = &raw[start..end];
        if run.len() >= MIN_SEGMENT_SAMPLES {
            let base = run[0].t_minutes;
            let samples = run
                .iter()
                .map(|s| (s.t_minutes - base, s.temperature_c))
                .collect();
            segments.push(TraceSegment::new(run[0].mode, samples)?);
        } else {
            dropped += 1;
        }
        start = end;
    }
    Ok((segments, dropped))
}
