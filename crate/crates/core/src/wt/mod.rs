//! Budget-aware tuning of a whole workload under one shared budget.
//!
//! Every query first runs once with the default units (calibration). After
//! that a [`Scheduler`] picks one query per step and that query receives a
//! single trial, with its own searcher, plan cache and early-stop threshold.

mod scheduler;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::cost_units::{CostUnitVector, SearchSpace};
use crate::error::{Error, Result};
use crate::exec::ExecutionBackend;
use crate::planner::QuerySpec;
use crate::qt::session::{QuerySession, Step};
use crate::qt::{
    parse_trial_fields, trial_fields, trial_header, BudgetLedger, QtOptions, Searcher,
    SearcherConfig, TrialRecord, TrialRow,
};

pub use scheduler::{
    improvement_rate, reward, schedule_cost_based, schedule_improvement_rate,
    schedule_round_robin, schedule_ucb, Scheduler,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryStats {
    pub query_id: String,
    /// Trials after calibration.
    pub f_q: usize,
    pub default_time: f64,
    pub best_time: f64,
    pub reward_history: Vec<f64>,
    pub best_units: CostUnitVector,
    /// The query's searcher has nothing left to propose.
    pub exhausted: bool,
}

impl QueryStats {
    pub fn average_reward(&self) -> f64 {
        if self.f_q == 0 {
            0.0
        } else {
            self.reward_history.iter().sum::<f64>() / self.f_q as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadState {
    pub stats: Vec<QueryStats>,
    pub ledger: BudgetLedger,
    pub round_robin_cursor: usize,
}

impl WorkloadState {
    /// `N`, the trial count summed over queries.
    pub fn total_trials(&self) -> usize {
        self.stats.iter().map(|s| s.f_q).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub query_id: String,
    pub best_units: CostUnitVector,
    pub best_time: f64,
    pub default_time: f64,
    pub improvement: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub spent_seconds: f64,
    pub improvement_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadTrial {
    pub query_id: String,
    pub scheduler: String,
    pub record: TrialRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WtResult {
    pub scheduler: Scheduler,
    pub per_query: Vec<QueryOutcome>,
    pub workload_default_time: f64,
    pub workload_best_time: f64,
    pub curve: Vec<CurvePoint>,
    pub trial_log: Vec<WorkloadTrial>,
    pub ledger: BudgetLedger,
    pub calibration_incomplete: bool,
}

impl WtResult {
    pub fn improvement(&self) -> f64 {
        workload_improvement(self.workload_default_time, self.workload_best_time)
    }

    /// Trials of one query, in order.
    pub fn query_trials<'a>(&'a self, query_id: &'a str) -> impl Iterator<Item = &'a TrialRecord> + 'a {
        self.trial_log
            .iter()
            .filter(move |t| t.query_id == query_id)
            .map(|t| &t.record)
    }
}

pub fn workload_improvement(default_total: f64, best_total: f64) -> f64 {
    if default_total > 0.0 {
        (1.0 - best_total / default_total).max(0.0)
    } else {
        0.0
    }
}

fn trial_reward(record: &TrialRecord, default_time: f64) -> f64 {
    if record.stopped_early {
        0.0
    } else {
        reward(record.observed_time, default_time).unwrap_or(0.0)
    }
}

/// Tunes every query of `workload` within `budget` seconds in total.
#[allow(clippy::too_many_arguments)]
pub fn tune_workload(
    workload: &[QuerySpec],
    defaults: &CostUnitVector,
    space: &SearchSpace,
    budget: f64,
    scheduler: Scheduler,
    searcher: &SearcherConfig,
    backend: &mut dyn ExecutionBackend,
    options: QtOptions,
) -> Result<WtResult> {
    if workload.is_empty() {
        return Err(Error::InvalidArgument("workload has no queries".into()));
    }
    for q in workload {
        q.validate()?;
    }
    if !space.contains(defaults) {
        return Err(Error::InvalidArgument(
            "default units lie outside the search space".into(),
        ));
    }
    let mut ledger = BudgetLedger::new(budget)?;
    let mut sessions: Vec<QuerySession<'_>> = workload
        .iter()
        .map(|q| QuerySession::new(q, *defaults, options))
        .collect();
    let mut searchers: Vec<Box<dyn Searcher + Send>> = (0..workload.len())
        .map(|i| searcher.build(space, i as u64))
        .collect::<Result<_>>()?;
    let label = scheduler.label().to_string();
    let mut log = Vec::new();
    let log_last = |log: &mut Vec<WorkloadTrial>, s: &QuerySession<'_>| {
        log.push(WorkloadTrial {
            query_id: s.query.id.clone(),
            scheduler: label.clone(),
            record: s.trials.last().expect("a trial was just recorded").clone(),
        });
    };

    let mut calibrated = true;
    for s in sessions.iter_mut() {
        let complete = s.baseline(backend, &mut ledger)?;
        log_last(&mut log, s);
        if !complete {
            calibrated = false;
            break;
        }
    }

    let mut curve = Vec::new();
    if calibrated {
        let mut state = WorkloadState {
            stats: sessions
                .iter()
                .map(|s| {
                    let t0 = s.default_time.expect("calibrated");
                    QueryStats {
                        query_id: s.query.id.clone(),
                        f_q: 0,
                        default_time: t0,
                        best_time: t0,
                        reward_history: Vec::new(),
                        best_units: s.defaults,
                        exhausted: false,
                    }
                })
                .collect(),
            ledger,
            round_robin_cursor: 0,
        };
        let default_total: f64 = state.stats.iter().map(|s| s.default_time).sum();
        let best_total = |stats: &[QueryStats]| stats.iter().map(|s| s.best_time).sum::<f64>();
        let point = |spent: f64, best_total: f64| CurvePoint {
            spent_seconds: spent,
            improvement_fraction: workload_improvement(default_total, best_total),
        };
        curve.push(point(ledger.spent, default_total));

        while !ledger.is_exhausted() {
            state.ledger = ledger;
            let Some(pick) = scheduler.select(&mut state) else {
                break;
            };
            let session = &mut sessions[pick];
            match session.step(searchers[pick].as_mut(), backend, &mut ledger)? {
                Step::Trial => {
                    let stats = &mut state.stats[pick];
                    let record = session.trials.last().expect("trial recorded");
                    stats.f_q += 1;
                    stats.reward_history.push(trial_reward(record, stats.default_time));
                    let (best, units) = session.best.expect("calibrated");
                    if best < stats.best_time {
                        stats.best_time = best;
                        stats.best_units = units;
                    }
                    log_last(&mut log, session);
                    curve.push(point(ledger.spent, best_total(&state.stats)));
                }
                Step::Exhausted => state.stats[pick].exhausted = true,
                Step::OutOfBudget => break,
            }
        }
    }

    let per_query: Vec<QueryOutcome> = sessions
        .iter()
        .filter_map(|s| {
            let default_time = s.default_time?;
            let (best_time, best_units) = s.best?;
            Some(QueryOutcome {
                query_id: s.query.id.clone(),
                best_units,
                best_time,
                default_time,
                improvement: workload_improvement(default_time, best_time),
            })
        })
        .collect();
    Ok(WtResult {
        scheduler,
        workload_default_time: per_query.iter().map(|q| q.default_time).sum(),
        workload_best_time: per_query.iter().map(|q| q.best_time).sum(),
        per_query,
        curve,
        trial_log: log,
        ledger,
        calibration_incomplete: !calibrated,
    })
}

pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["spent_seconds", "improvement_fraction"])?;
    for p in curve {
        w.write_record([p.spent_seconds.to_string(), p.improvement_fraction.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(input: R) -> Result<Vec<CurvePoint>> {
    let mut r = csv::Reader::from_reader(input);
    r.records()
        .map(|rec| {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::validation("curve csv", format!("bad value in column {i}")))
            };
            Ok(CurvePoint {
                spent_seconds: num(0)?,
                improvement_fraction: num(1)?,
            })
        })
        .collect()
}

/// Trial CSV with leading `query_id,scheduler` columns.
pub fn write_trial_log_csv<W: Write>(log: &[WorkloadTrial], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trial_header(&["query_id", "scheduler"]))?;
    for t in log {
        let mut fields = vec![t.query_id.clone(), t.scheduler.clone()];
        fields.extend(trial_fields(&TrialRow::from(&t.record)));
        w.write_record(fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trial_log_csv<R: Read>(input: R) -> Result<Vec<(String, String, TrialRow)>> {
    let mut r = csv::Reader::from_reader(input);
    r.records()
        .map(|rec| {
            let rec = rec?;
            let id = rec.get(0).unwrap_or_default().to_string();
            let sched = rec.get(1).unwrap_or_default().to_string();
            Ok((id, sched, parse_trial_fields(&rec, 2)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_units::{default_vector, make_search_space};
    use crate::exec::{SimulatedBackend, TrueCostProfile};
    use crate::planner::fixtures::*;

    fn small_workload() -> Vec<QuerySpec> {
        vec![
            query("a", vec![table("A", 1000, 100, true, 0.05)], vec![]),
            query(
                "b",
                vec![table("B", 5000, 400, true, 0.3), table("C", 800, 20, false, 1.0)],
                vec![edge("B", "C", 0.001)],
            ),
            query("c", vec![table("D", 300, 30, false, 1.0)], vec![]),
        ]
    }

    #[test]
    fn identity_profile_finds_nothing() {
        let d = default_vector();
        let space = make_search_space(&d, 0.1, 10.0).unwrap();
        let profile = TrueCostProfile::identity(d);
        let mut backend = SimulatedBackend::new(&profile);
        for scheduler in [
            Scheduler::RoundRobin,
            Scheduler::CostBased,
            Scheduler::ucb(),
            Scheduler::ImprovementRate,
        ] {
            let r = tune_workload(
                &small_workload(),
                &d,
                &space,
                5_000.0,
                scheduler,
                &SearcherConfig::Random { seed: 3 },
                &mut backend,
                QtOptions::default(),
            )
            .unwrap();
            assert!(!r.calibration_incomplete);
            assert_eq!(r.improvement(), 0.0);
            assert!(r.curve.iter().all(|p| p.improvement_fraction == 0.0));
            assert!(r.per_query.iter().all(|q| q.improvement == 0.0));
            assert!(r.ledger.spent <= 5_000.0);
        }
    }

    #[test]
    fn round_robin_balances_trials() {
        let d = default_vector();
        let space = make_search_space(&d, 0.1, 10.0).unwrap();
        let profile = TrueCostProfile::identity(d);
        let mut backend = SimulatedBackend::new(&profile);
        let options = QtOptions {
            max_trials: 4,
            ..QtOptions::default()
        };
        let r = tune_workload(
            &small_workload(),
            &d,
            &space,
            1e9,
            Scheduler::RoundRobin,
            &SearcherConfig::Random { seed: 3 },
            &mut backend,
            options,
        )
        .unwrap();
        for q in ["a", "b", "c"] {
            assert_eq!(r.query_trials(q).count(), 5);
        }
        let order: Vec<_> = r.trial_log[3..9].iter().map(|t| t.query_id.as_str()).collect();
        assert_eq!(order, ["a", "b", "c", "a", "b", "c"]);
    }

    #[test]
    fn calibration_shortfall_is_flagged() {
        let d = default_vector();
        let space = make_search_space(&d, 0.1, 10.0).unwrap();
        let profile = TrueCostProfile::identity(d);
        let mut backend = SimulatedBackend::new(&profile);
        let r = tune_workload(
            &small_workload(),
            &d,
            &space,
            20.0,
            Scheduler::RoundRobin,
            &SearcherConfig::Random { seed: 3 },
            &mut backend,
            QtOptions::default(),
        )
        .unwrap();
        assert!(r.calibration_incomplete);
        assert!(r.curve.is_empty());
        assert!(r.ledger.spent <= 20.0);
    }

    #[test]
    fn csv_round_trips() {
        let curve = vec![
            CurvePoint {
                spent_seconds: 1.5,
                improvement_fraction: 0.0,
            },
            CurvePoint {
                spent_seconds: 2.0 / 3.0,
                improvement_fraction: 0.1 + 0.2,
            },
        ];
        let mut buf = Vec::new();
        write_curve_csv(&curve, &mut buf).unwrap();
        assert!(buf.starts_with(b"spent_seconds,improvement_fraction\n"));
        assert_eq!(read_curve_csv(buf.as_slice()).unwrap(), curve);

        let d = default_vector();
        let space = make_search_space(&d, 0.1, 10.0).unwrap();
        let profile = TrueCostProfile::identity(d);
        let mut backend = SimulatedBackend::new(&profile);
        let r = tune_workload(
            &small_workload(),
            &d,
            &space,
            2_000.0,
            Scheduler::ucb(),
            &SearcherConfig::Random { seed: 9 },
            &mut backend,
            QtOptions::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trial_log_csv(&r.trial_log, &mut buf).unwrap();
        let rows = read_trial_log_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), r.trial_log.len());
        for ((id, sched, row), t) in rows.iter().zip(&r.trial_log) {
            assert_eq!(id, &t.query_id);
            assert_eq!(sched, "ucb");
            assert_eq!(row, &TrialRow::from(&t.record));
        }
        let json = serde_json::to_string(&r).unwrap();
        let back: WtResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
