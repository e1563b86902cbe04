//! Budget-aware tuning of a single query.
//!
//! The default units run first and set both the reference time and the
//! initial best. Each later trial takes one proposal from a [`Searcher`],
//! skips execution when the resulting plan is already cached, and otherwise
//! runs it with an early-stop threshold of `min(best so far, remaining budget)`.
//! Total charged time therefore never exceeds the budget.

mod ledger;
mod searcher;
pub(crate) mod session;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::cost_units::{CostUnitVector, SearchSpace, COST_UNITS};
use crate::error::{Error, Result};
use crate::exec::ExecutionBackend;
use crate::planner::QuerySpec;

pub use ledger::{BudgetLedger, PlanCache};
pub use searcher::{GridSearcher, RandomSearcher, Searcher, SearcherConfig};
use session::{QuerySession, Step};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// 1-based; trial 1 is the default-units baseline.
    pub trial_index: usize,
    pub units: CostUnitVector,
    pub plan_fingerprint: String,
    pub observed_time: f64,
    pub charged_time: f64,
    pub cache_hit: bool,
    pub stopped_early: bool,
    /// Early-stop threshold the run was given, if it was executed with one.
    pub threshold: Option<f64>,
    /// Best fully observed time after this trial.
    pub best_time_after: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QtOptions {
    /// Cap on searcher proposals after the baseline.
    pub max_trials: usize,
    pub use_cache: bool,
    pub early_stopping: bool,
    /// Count the baseline run against the budget.
    pub charge_baseline: bool,
}

impl Default for QtOptions {
    fn default() -> Self {
        QtOptions {
            max_trials: 100,
            use_cache: true,
            early_stopping: true,
            charge_baseline: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QtResult {
    pub query_id: String,
    pub best_units: CostUnitVector,
    pub best_time: f64,
    /// Time of the default plan; a lower bound when the baseline was cut off.
    pub default_time: f64,
    pub trials: Vec<TrialRecord>,
    pub ledger: BudgetLedger,
    pub budget_exhausted_during_baseline: bool,
}

impl QtResult {
    pub fn improvement(&self) -> f64 {
        percentage_improvement(self.default_time, self.best_time).unwrap_or(0.0)
    }
}

/// `max(1 - best/default, 0)`.
pub fn percentage_improvement(default_time: f64, best_time: f64) -> Result<f64> {
    if !(default_time.is_finite() && default_time > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "default time must be positive, got {default_time}"
        )));
    }
    Ok((1.0 - best_time / default_time).max(0.0))
}

/// Tunes `query` within `budget` seconds of execution time.
pub fn tune_query(
    query: &QuerySpec,
    defaults: &CostUnitVector,
    space: &SearchSpace,
    budget: f64,
    searcher: &mut dyn Searcher,
    backend: &mut dyn ExecutionBackend,
    options: QtOptions,
) -> Result<QtResult> {
    query.validate()?;
    if !space.contains(defaults) {
        return Err(Error::InvalidArgument(
            "default units lie outside the search space".into(),
        ));
    }
    let mut ledger = BudgetLedger::new(budget)?;
    let mut session = QuerySession::new(query, *defaults, options);

    let complete = session.baseline(backend, &mut ledger)?;
    if complete {
        while session.step(searcher, backend, &mut ledger)? == Step::Trial {}
    }
    Ok(finish(session, ledger, !complete))
}

pub(crate) fn finish(session: QuerySession<'_>, ledger: BudgetLedger, cut_off: bool) -> QtResult {
    let baseline_observed = session.trials[0].observed_time;
    let default_time = session.default_time.unwrap_or(baseline_observed);
    let (best_time, best_units) = session.best.unwrap_or((default_time, session.defaults));
    QtResult {
        query_id: session.query.id.clone(),
        best_units,
        best_time,
        default_time,
        trials: session.trials,
        ledger,
        budget_exhausted_during_baseline: cut_off,
    }
}

/// One row of the trial CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub units: CostUnitVector,
    pub fingerprint: String,
    pub observed_s: f64,
    pub charged_s: f64,
    pub cache_hit: bool,
    pub stopped_early: bool,
}

impl From<&TrialRecord> for TrialRow {
    fn from(r: &TrialRecord) -> Self {
        TrialRow {
            trial: r.trial_index,
            units: r.units,
            fingerprint: r.plan_fingerprint.clone(),
            observed_s: r.observed_time,
            charged_s: r.charged_time,
            cache_hit: r.cache_hit,
            stopped_early: r.stopped_early,
        }
    }
}

pub(crate) fn trial_header(prefix: &[&str]) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain(std::iter::once("trial".to_string()))
        .chain(COST_UNITS.iter().map(|u| u.name.to_string()))
        .chain(
            ["fingerprint", "observed_s", "charged_s", "cache_hit", "stopped_early"]
                .iter()
                .map(|s| s.to_string()),
        )
        .collect()
}

pub(crate) fn trial_fields(row: &TrialRow) -> Vec<String> {
    std::iter::once(row.trial.to_string())
        .chain(row.units.values().iter().map(|v| v.to_string()))
        .chain([
            row.fingerprint.clone(),
            row.observed_s.to_string(),
            row.charged_s.to_string(),
            row.cache_hit.to_string(),
            row.stopped_early.to_string(),
        ])
        .collect()
}

pub(crate) fn parse_trial_fields(rec: &csv::StringRecord, offset: usize) -> Result<TrialRow> {
    let field = |i: usize| {
        rec.get(offset + i)
            .ok_or_else(|| Error::validation("trial csv", format!("missing column {}", offset + i)))
    };
    let num = |i: usize| -> Result<f64> {
        field(i)?
            .parse()
            .map_err(|_| Error::validation("trial csv", format!("bad number in column {}", offset + i)))
    };
    let flag = |i: usize| -> Result<bool> {
        field(i)?
            .parse()
            .map_err(|_| Error::validation("trial csv", format!("bad flag in column {}", offset + i)))
    };
    let trial = field(0)?
        .parse()
        .map_err(|_| Error::validation("trial csv", "bad trial index"))?;
    let mut values = [0.0; crate::cost_units::UNIT_COUNT];
    for (k, v) in values.iter_mut().enumerate() {
        *v = num(1 + k)?;
    }
    let n = values.len();
    Ok(TrialRow {
        trial,
        units: CostUnitVector::new(values)?,
        fingerprint: field(1 + n)?.to_string(),
        observed_s: num(2 + n)?,
        charged_s: num(3 + n)?,
        cache_hit: flag(4 + n)?,
        stopped_early: flag(5 + n)?,
    })
}

/// Writes `trial,<units…>,fingerprint,observed_s,charged_s,cache_hit,stopped_early`.
pub fn write_trials_csv<W: Write>(trials: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trial_header(&[]))?;
    for t in trials {
        w.write_record(trial_fields(&TrialRow::from(t)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials_csv<R: Read>(input: R) -> Result<Vec<TrialRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.records()
        .map(|rec| parse_trial_fields(&rec?, 0))
        .collect()
}
