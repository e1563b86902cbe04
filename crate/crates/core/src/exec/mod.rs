//! Observed execution time of a plan.
//!
//! Tuners talk to an [`ExecutionBackend`]. The [`SimulatedBackend`] derives
//! times from a hidden [`TrueCostProfile`]; [`SubprocessBackend`] forwards
//! requests to an external engine over newline-delimited JSON.

mod simulated;
mod subprocess;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cost_units::CostUnitVector;
use crate::error::{Error, Result};
use crate::planner::{OperatorKind, QuerySpec};

pub use simulated::{fastest_plan, true_time, SimulatedBackend};
pub use subprocess::{SubprocessBackend, WireRequest, WireResponse};

/// Ground-truth timing model of the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueCostProfile {
    pub true_units: CostUnitVector,
    /// Per-query, per-operator factors; absent entries are 1.0.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub multipliers: BTreeMap<String, BTreeMap<OperatorKind, f64>>,
    /// Seconds per abstract cost unit.
    pub time_scale: f64,
}

impl TrueCostProfile {
    /// Truth equals the given units with no distortion.
    pub fn identity(units: CostUnitVector) -> Self {
        TrueCostProfile {
            true_units: units,
            multipliers: BTreeMap::new(),
            time_scale: 1.0,
        }
    }

    pub fn multiplier(&self, query_id: &str, op: OperatorKind) -> f64 {
        self.multipliers
            .get(query_id)
            .and_then(|m| m.get(&op))
            .copied()
            .unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_scale.is_finite() && self.time_scale > 0.0) {
            return Err(Error::validation(
                "true_profile.time_scale",
                format!("must be positive, got {}", self.time_scale),
            ));
        }
        for (query, ops) in &self.multipliers {
            for (op, &m) in ops {
                if !(m.is_finite() && m > 0.0) {
                    return Err(Error::validation(
                        format!("true_profile.multipliers.{query}.{op:?}"),
                        format!("must be positive, got {m}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExecutionRequest<'a> {
    pub query: &'a QuerySpec,
    pub units: CostUnitVector,
    /// Kill the run once it has taken this many seconds.
    pub early_stop_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub plan_fingerprint: String,
    /// Full run time. For stopped runs of a real engine this is only a lower bound.
    pub true_time: f64,
    pub observed_time: f64,
    pub charged_time: f64,
    pub stopped_early: bool,
}

impl ExecutionResult {
    /// Applies the early-stop contract to a run that would take `time` seconds.
    pub fn from_run(plan_fingerprint: String, time: f64, threshold: Option<f64>) -> Self {
        match threshold {
            Some(limit) if time >= limit => ExecutionResult {
                plan_fingerprint,
                true_time: time,
                observed_time: limit,
                charged_time: limit,
                stopped_early: true,
            },
            _ => ExecutionResult {
                plan_fingerprint,
                true_time: time,
                observed_time: time,
                charged_time: time,
                stopped_early: false,
            },
        }
    }
}

pub trait ExecutionBackend {
    /// Fingerprint of the plan the engine would run, if it can be known
    /// without executing. Enables plan-cache lookups before paying for a run.
    fn explain(&mut self, query: &QuerySpec, units: &CostUnitVector) -> Result<Option<String>>;

    fn execute(&mut self, req: &ExecutionRequest<'_>) -> Result<ExecutionResult>;
}

pub(crate) fn check_threshold(threshold: Option<f64>) -> Result<()> {
    match threshold {
        Some(t) if t.is_nan() || t < 0.0 => Err(Error::InvalidArgument(format!(
            "early-stop threshold must be >= 0, got {t}"
        ))),
        _ => Ok(()),
    }
}

/// Runs one request on a backend.
pub fn execute(req: &ExecutionRequest<'_>, backend: &mut dyn ExecutionBackend) -> Result<ExecutionResult> {
    check_threshold(req.early_stop_threshold)?;
    backend.execute(req)
}
