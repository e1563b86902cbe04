use super::{BudgetLedger, PlanCache, QtOptions, Searcher, TrialRecord};
use crate::cost_units::CostUnitVector;
use crate::error::Result;
use crate::exec::{execute, ExecutionBackend, ExecutionRequest};
use crate::planner::QuerySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Step {
    Trial,
    Exhausted,
    OutOfBudget,
}

/// Tuning state of one query. Budget lives outside so a workload can share it.
pub(crate) struct QuerySession<'q> {
    pub query: &'q QuerySpec,
    pub defaults: CostUnitVector,
    pub options: QtOptions,
    pub cache: PlanCache,
    pub trials: Vec<TrialRecord>,
    pub best: Option<(f64, CostUnitVector)>,
    pub default_time: Option<f64>,
    proposals: usize,
}

impl<'q> QuerySession<'q> {
    pub fn new(query: &'q QuerySpec, defaults: CostUnitVector, options: QtOptions) -> Self {
        QuerySession {
            query,
            defaults,
            options,
            cache: PlanCache::default(),
            trials: Vec::new(),
            best: None,
            default_time: None,
            proposals: 0,
        }
    }

    pub fn best_time(&self) -> Option<f64> {
        self.best.map(|(t, _)| t)
    }

    /// Runs the default units. Returns false when the budget ran out first.
    pub fn baseline(
        &mut self,
        backend: &mut dyn ExecutionBackend,
        ledger: &mut BudgetLedger,
    ) -> Result<bool> {
        let charge = self.options.charge_baseline;
        let threshold = charge.then(|| ledger.remaining());
        let res = execute(
            &ExecutionRequest {
                query: self.query,
                units: self.defaults,
                early_stop_threshold: threshold,
            },
            backend,
        )?;
        let charged = if charge { res.charged_time } else { 0.0 };
        ledger.charge(charged)?;
        if !res.stopped_early {
            self.default_time = Some(res.observed_time);
            self.best = Some((res.observed_time, self.defaults));
            self.cache.record(&res.plan_fingerprint, res.observed_time);
        }
        self.trials.push(TrialRecord {
            trial_index: 1,
            units: self.defaults,
            plan_fingerprint: res.plan_fingerprint,
            observed_time: res.observed_time,
            charged_time: charged,
            cache_hit: false,
            stopped_early: res.stopped_early,
            threshold,
            best_time_after: self.best_time(),
        });
        Ok(!res.stopped_early)
    }

    /// One proposal from the searcher, resolved from the cache or executed
    /// under the early-stop threshold. Requires a completed baseline.
    pub fn step(
        &mut self,
        searcher: &mut dyn Searcher,
        backend: &mut dyn ExecutionBackend,
        ledger: &mut BudgetLedger,
    ) -> Result<Step> {
        let remaining = ledger.remaining();
        if remaining <= 0.0 {
            return Ok(Step::OutOfBudget);
        }
        if self.proposals >= self.options.max_trials {
            return Ok(Step::Exhausted);
        }
        let Some(units) = searcher.next(&self.trials) else {
            return Ok(Step::Exhausted);
        };
        self.proposals += 1;
        let trial_index = self.trials.len() + 1;

        if self.options.use_cache {
            if let Some(fp) = backend.explain(self.query, &units)? {
                if let Some(cached) = self.cache.get(&fp) {
                    self.trials.push(TrialRecord {
                        trial_index,
                        units,
                        plan_fingerprint: fp,
                        observed_time: cached,
                        charged_time: 0.0,
                        cache_hit: true,
                        stopped_early: false,
                        threshold: None,
                        best_time_after: self.best_time(),
                    });
                    return Ok(Step::Trial);
                }
            }
        }

        let best = self.best_time().expect("baseline completed before tuning");
        let threshold = if self.options.early_stopping {
            best.min(remaining)
        } else {
            remaining
        };
        let res = execute(
            &ExecutionRequest {
                query: self.query,
                units,
                early_stop_threshold: Some(threshold),
            },
            backend,
        )?;
        ledger.charge(res.charged_time)?;
        if !res.stopped_early {
            self.cache.record(&res.plan_fingerprint, res.observed_time);
            if res.observed_time < best {
                self.best = Some((res.observed_time, units));
            }
        }
        self.trials.push(TrialRecord {
            trial_index,
            units,
            plan_fingerprint: res.plan_fingerprint,
            observed_time: res.observed_time,
            charged_time: res.charged_time,
            cache_hit: false,
            stopped_early: res.stopped_early,
            threshold: Some(threshold),
            best_time_after: self.best_time(),
        });
        Ok(Step::Trial)
    }
}
