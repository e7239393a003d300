//! On-disk formats: JSON documents for test cases, coefficient tables,
//! configurations and run manifests, plus CSV traces.
//!
//! Every parser takes raw bytes, returns [`Error`](crate::error::Error)
//! on malformed input, and never panics; each one has a fuzz target under
//! `fuzz/fuzz_targets/`.  Serialization is byte-deterministic: map-free
//! document shapes, ordered registries, and shortest-round-trip floats.
//!
//! # Test case document
//!
//! ```json
//! {
//!   "tc": [
//!     { "st": { "temp": 21.3, "duration": 95, "model": 2 } },
//!     { "st": { "temp": 16.9, "duration": 360, "model": 1 } }
//!   ]
//! }
//! ```
//!
//! # Coefficient table
//!
//! ```json
//! {
//!   "models": [
//!     { "model_id": 1, "k_on1": 6.0, "k_on2": 0.14170703,
//!       "k_off1": 4.3, "k_off2": 0.09531917 }
//!   ]
//! }
//! ```
//!
//! # Raw trace CSV
//!
//! ```csv
//! t_minutes,temperature_c,mode
//! 0.0,18.2,on
//! 1.0,18.9,on
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{ComparisonReport, GaConfig, GenerationStats};
use crate::scenario::{GeneratorConfig, ScenarioState, TestCase};
use crate::sim::{SimConfig, Trace};
use crate::surrogate::{Mode, ModelCoefficients, ModelRegistry};
use crate::sysid::RawSample;

// ---------------------------------------------------------------------------
// Test case documents
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestCaseDoc {
    tc: Vec<StateEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateEntry {
    st: StateDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    temp: f64,
    duration: u32,
    model: u32,
}

/// Parse a test case document.
///
/// Structural validation only: the document must be non-empty with finite
/// temperatures and positive durations.  Range constraints on targets and
/// durations are generation-time concerns, so hand-written schedules
/// outside them can still be simulated.
pub fn parse_test_case(bytes: &[u8]) -> Result<TestCase> {
    let doc: TestCaseDoc = serde_json::from_slice(bytes)?;
    if doc.tc.is_empty() {
        return Err(Error::Malformed("document contains no states".into()));
    }
    let mut states = Vec::with_capacity(doc.tc.len());
    for (i, entry) in doc.tc.iter().enumerate() {
        if !entry.st.temp.is_finite() {
            return Err(Error::Malformed(format!(
                "state {i}: temp must be finite, got {}",
                entry.st.temp
            )));
        }
        if entry.st.duration == 0 {
            return Err(Error::Malformed(format!("state {i}: duration must be >= 1")));
        }
        states.push(ScenarioState {
            target_temp: entry.st.temp,
            duration: entry.st.duration,
            model_id: entry.st.model,
            mode_hint: None,
        });
    }
    Ok(TestCase::new(states))
}

pub fn test_case_to_json(tc: &TestCase) -> String {
    let doc = TestCaseDoc {
        tc: tc
            .states
            .iter()
            .map(|s| StateEntry {
                st: StateDoc {
                    temp: s.target_temp,
                    duration: s.duration,
                    model: s.model_id,
                },
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("test case serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Coefficient tables
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryDoc {
    models: Vec<ModelCoefficients>,
}

/// Parse a coefficient table into a registry, enforcing unique ids and
/// positive coefficients.
pub fn parse_registry(bytes: &[u8]) -> Result<ModelRegistry> {
    let doc: RegistryDoc = serde_json::from_slice(bytes)?;
    ModelRegistry::from_models(doc.models)
}

pub fn registry_to_json(registry: &ModelRegistry) -> String {
    let doc = RegistryDoc {
        models: registry.models().copied().collect(),
    };
    serde_json::to_string_pretty(&doc).expect("registry serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Raw trace CSV
// ---------------------------------------------------------------------------

const TRACE_HEADER: [&str; 3] = ["t_minutes", "temperature_c", "mode"];

/// Parse raw trace rows; the header line is mandatory and errors carry
/// line numbers.
pub fn parse_raw_trace(bytes: &[u8]) -> Result<Vec<RawSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let headers = reader
        .headers()
        .map_err(|e| Error::Malformed(format!("unreadable header: {e}")))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != TRACE_HEADER {
        return Err(Error::Malformed(format!(
            "expected header {:?}, got {:?}",
            TRACE_HEADER.join(","),
            got.join(",")
        )));
    }

    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            Error::MalformedRow {
                line,
                msg: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        let row_err = |msg: String| Error::MalformedRow { line, msg };
        if record.len() != 3 {
            return Err(row_err(format!("expected 3 fields, got {}", record.len())));
        }
        let t: f64 = record[0]
            .parse()
            .map_err(|e| row_err(format!("bad t_minutes {:?}: {e}", &record[0])))?;
        let y: f64 = record[1]
            .parse()
            .map_err(|e| row_err(format!("bad temperature_c {:?}: {e}", &record[1])))?;
        if !t.is_finite() || !y.is_finite() {
            return Err(row_err("values must be finite".into()));
        }
        let mode = match record[2].to_ascii_lowercase().as_str() {
            "on" => Mode::On,
            "off" => Mode::Off,
            other => return Err(row_err(format!("mode must be on or off, got {other:?}"))),
        };
        samples.push(RawSample {
            t_minutes: t,
            temperature_c: y,
            mode,
        });
    }
    Ok(samples)
}

pub fn raw_trace_to_csv(samples: &[RawSample]) -> String {
    let mut out = String::from("t_minutes,temperature_c,mode\n");
    for s in samples {
        let mode = match s.mode {
            Mode::On => "on",
            Mode::Off => "off",
        };
        out.push_str(&format!("{},{},{}\n", s.t_minutes, s.temperature_c, mode));
    }
    out
}

// ---------------------------------------------------------------------------
// Simulation trace export
// ---------------------------------------------------------------------------

/// Plot-ready minute-by-minute export of expected vs simulated behaviour.
pub fn trace_export_csv(expected: &Trace, simulated: &Trace) -> String {
    assert_eq!(expected.len(), simulated.len(), "traces must be aligned");
    let mut out = String::from("minute_index,expected_c,simulated_c\n");
    for (i, (e, s)) in expected.values().iter().zip(simulated.values()).enumerate() {
        out.push_str(&format!("{i},{e},{s}\n"));
    }
    out
}

/// Convergence history export, one row per recorded generation.
pub fn history_to_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from("generation,best_fitness,mean_fitness\n");
    for (i, g) in history.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, g.best, g.mean));
    }
    out
}

/// The three comparison series in long form: GA bests, RS bests, and
/// every random individual, ready for a boxplot tool.
pub fn comparison_runs_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("series,run_index,fitness\n");
    for (i, r) in report.ga.iter().enumerate() {
        out.push_str(&format!("ga_best,{i},{}\n", r.best_fitness));
    }
    for (i, r) in report.rs.iter().enumerate() {
        out.push_str(&format!("rs_best,{i},{}\n", r.best_fitness));
    }
    let budget = report.budget.max(1);
    for (j, f) in report.pooled_random.iter().enumerate() {
        out.push_str(&format!("rs_individual,{},{f}\n", j / budget));
    }
    out
}

#[derive(Serialize)]
struct ComparisonSummaryDoc<'a> {
    runs: usize,
    base_seed: u64,
    budget: usize,
    ga_best: &'a crate::stats::SeriesSummary,
    rs_best: &'a crate::stats::SeriesSummary,
    pooled_random_individuals: &'a crate::stats::SeriesSummary,
    rank_sum_test: RankTestDoc<'a>,
}

#[derive(Serialize)]
struct RankTestDoc<'a> {
    note: &'static str,
    #[serde(flatten)]
    test: &'a crate::stats::RankSumTest,
}

pub fn comparison_summary_json(report: &ComparisonReport) -> String {
    let doc = ComparisonSummaryDoc {
        runs: report.runs,
        base_seed: report.base_seed,
        budget: report.budget,
        ga_best: &report.ga_summary,
        rs_best: &report.rs_summary,
        pooled_random_individuals: &report.pooled_summary,
        rank_sum_test: RankTestDoc {
            note: "supplementary diagnostic: normal-approximation rank-sum comparison of per-run bests",
            test: &report.rank_test,
        },
    };
    serde_json::to_string_pretty(&doc).expect("summary serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Configuration files
// ---------------------------------------------------------------------------

pub fn parse_generator_config(bytes: &[u8]) -> Result<GeneratorConfig> {
    let cfg: GeneratorConfig = serde_json::from_slice(bytes)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_ga_config(bytes: &[u8]) -> Result<GaConfig> {
    let cfg: GaConfig = serde_json::from_slice(bytes)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_sim_config(bytes: &[u8]) -> Result<SimConfig> {
    let cfg: SimConfig = serde_json::from_slice(bytes)?;
    cfg.validate()?;
    Ok(cfg)
}

/// All tunable parameters in one document, as emitted by
/// `print-default-config`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigBundle {
    pub generator: GeneratorConfig,
    pub ga: GaConfig,
    pub sim: SimConfig,
}

impl ConfigBundle {
    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.ga.validate()?;
        self.sim.validate()
    }
}

pub fn parse_config_bundle(bytes: &[u8]) -> Result<ConfigBundle> {
    let bundle: ConfigBundle = serde_json::from_slice(bytes)?;
    bundle.validate()?;
    Ok(bundle)
}

pub fn config_bundle_to_json(bundle: &ConfigBundle) -> String {
    serde_json::to_string_pretty(bundle).expect("config serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

/// Paths and seed describing one evolve/random-search/compare run.
/// Relative paths resolve against the manifest's directory; absent
/// optional paths fall back to built-in defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_config: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ga_config: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim_config: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

/// Parse a manifest without touching the filesystem.
pub fn parse_manifest(bytes: &[u8]) -> Result<RunManifest> {
    Ok(serde_json::from_slice(bytes)?)
}

pub fn manifest_to_json(manifest: &RunManifest) -> String {
    serde_json::to_string_pretty(manifest).expect("manifest serialization cannot fail")
}
