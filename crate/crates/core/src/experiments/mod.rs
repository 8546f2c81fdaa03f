//! Executable studies: energy law, a-priori bounds, moderateness and
//! negligibility of solution nets, and coherence with classical solutions.
//!
//! Independent cells (one `eps`, one random run) are scheduled on the rayon
//! pool and merged in input order, so results do not depend on the number of
//! worker threads.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fracops::FracOrder;
use crate::grid::Grid;

pub mod bounds;
pub mod coherence;
pub mod energy;
pub mod suite;
pub mod sweeps;

pub use bounds::{energy_estimate_audit, higher_energy_estimate_audit, BoundAudit};
pub use coherence::{coherence_study, CoherenceStudy};
pub use energy::{energy_audit, energy_refinement, EnergyAudit, EnergyMonitor, EnergyRecord};
pub use suite::{random_suite, RandomRun, SuiteSpec};
pub use sweeps::{
    moderateness_sweep, negligibility_sweep, DataNet, ModeratenessSweep, NegligibilitySweep,
    SweepRecord,
};

/// Grid and time stepping shared by the runs of a study.
#[derive(Clone, Debug)]
pub struct RunSetup {
    pub grid: Grid,
    pub s: FracOrder,
    pub t_final: f64,
    pub dt: f64,
    /// Steps between samples of sup-in-time quantities.
    pub stride: usize,
}

/// Machine-readable outcome of a study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub study: String,
    pub pass: bool,
    /// Undefined values are written as `null` and read back as NaN.
    #[serde(deserialize_with = "nan_from_null")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(deserialize_with = "nan_from_null")]
    pub thresholds: BTreeMap<String, f64>,
    /// The mathematical statement the study exercises.
    #[serde(rename = "paper_ref")]
    pub statement: String,
}

fn nan_from_null<'de, D>(de: D) -> std::result::Result<BTreeMap<String, f64>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let raw = BTreeMap::<String, Option<f64>>::deserialize(de)?;
    Ok(raw
        .into_iter()
        .map(|(k, v)| (k, v.unwrap_or(f64::NAN)))
        .collect())
}

impl Verdict {
    pub fn new(study: &str, pass: bool, statement: &str) -> Self {
        Verdict {
            study: study.into(),
            pass,
            metrics: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            statement: statement.into(),
        }
    }

    pub fn metric(&mut self, key: &str, value: f64) -> &mut Self {
        self.metrics.insert(key.into(), value);
        self
    }

    pub fn threshold(&mut self, key: &str, value: f64) -> &mut Self {
        self.thresholds.insert(key.into(), value);
        self
    }
}
