//! Workload tuning repeated over a grid of schedulers and budgets.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::WorkloadFile;
use crate::error::{Error, Result};
use crate::exec::SimulatedBackend;
use crate::qt::{QtOptions, SearcherConfig};
use crate::wt::{tune_workload, Scheduler, WtResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Strictly ascending, in seconds.
    pub budgets: Vec<f64>,
    pub schedulers: Vec<Scheduler>,
    /// Shared by every cell so that cells differ only in budget and policy.
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() {
            return Err(Error::validation("budgets", "at least one budget is required"));
        }
        if let Some(b) = self.budgets.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::validation("budgets", format!("budget {b} is not positive")));
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("budgets", "must be strictly ascending"));
        }
        if self.schedulers.is_empty() {
            return Err(Error::validation("schedulers", "at least one scheduler is required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOutcome {
    Ok(WtResult),
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub scheduler: Scheduler,
    pub budget: f64,
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub cells: Vec<SweepCell>,
}

/// Runs every (scheduler, budget) cell against the workload's simulator.
/// Cells run in parallel; a failing cell is reported without aborting the rest.
pub fn run_sweep(workload: &WorkloadFile, spec: &SweepSpec, options: QtOptions) -> Result<SweepReport> {
    spec.validate()?;
    workload.validate()?;
    let space = workload.search_space()?;
    let grid: Vec<(Scheduler, f64)> = spec
        .schedulers
        .iter()
        .flat_map(|&s| spec.budgets.iter().map(move |&b| (s, b)))
        .collect();
    let cells = grid
        .into_par_iter()
        .map(|(scheduler, budget)| {
            let mut backend = SimulatedBackend::new(&workload.true_profile);
            let outcome = match tune_workload(
                &workload.queries,
                &workload.defaults,
                &space,
                budget,
                scheduler,
                &SearcherConfig::Random { seed: spec.seed },
                &mut backend,
                options,
            ) {
                Ok(r) => CellOutcome::Ok(r),
                Err(e) => CellOutcome::Error(e.to_string()),
            };
            SweepCell {
                scheduler,
                budget,
                outcome,
            }
        })
        .collect();
    Ok(SweepReport {
        seed: spec.seed,
        cells,
    })
}

impl SweepReport {
    /// One row per cell: final improvement, spend and trial count.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "scheduler",
            "budget_s",
            "spent_s",
            "improvement_fraction",
            "workload_default_s",
            "workload_best_s",
            "trials",
            "status",
        ])?;
        for c in &self.cells {
            let mut row = vec![c.scheduler.label().to_string(), c.budget.to_string()];
            match &c.outcome {
                CellOutcome::Ok(r) => row.extend([
                    r.ledger.spent.to_string(),
                    r.improvement().to_string(),
                    r.workload_default_time.to_string(),
                    r.workload_best_time.to_string(),
                    r.trial_log.len().to_string(),
                    if r.calibration_incomplete {
                        "calibration_incomplete".to_string()
                    } else {
                        "ok".to_string()
                    },
                ]),
                CellOutcome::Error(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 5));
                    row.push(format!("error: {e}"));
                }
            }
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Every curve point of every successful cell.
    pub fn write_curves_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scheduler", "budget_s", "spent_seconds", "improvement_fraction"])?;
        for c in &self.cells {
            if let CellOutcome::Ok(r) = &c.outcome {
                for p in &r.curve {
                    w.write_record([
                        c.scheduler.label().to_string(),
                        c.budget.to_string(),
                        p.spent_seconds.to_string(),
                        p.improvement_fraction.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
