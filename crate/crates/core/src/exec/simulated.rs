use super::{check_threshold, ExecutionBackend, ExecutionRequest, ExecutionResult, TrueCostProfile};
use crate::cost_units::CostUnitVector;
use crate::error::Result;
use crate::planner::{evaluate_weighted, optimize, optimize_weighted, Plan, QuerySpec};

/// Seconds `plan` takes under the profile: the planner's formulas evaluated
/// with the true units and per-operator multipliers, scaled to seconds.
pub fn true_time(plan: &Plan, query: &QuerySpec, profile: &TrueCostProfile) -> Result<f64> {
    let cost = evaluate_weighted(plan, query, &profile.true_units, &|op| {
        profile.multiplier(&query.id, op)
    })?;
    Ok(cost.total * profile.time_scale)
}

/// The truly fastest left-deep plan and its time, found by running the
/// optimizer on the true profile itself.
pub fn fastest_plan(query: &QuerySpec, profile: &TrueCostProfile) -> Result<(Plan, f64)> {
    let (plan, _) = optimize_weighted(query, &profile.true_units, &|op| {
        profile.multiplier(&query.id, op)
    })?;
    let time = true_time(&plan, query, profile)?;
    Ok((plan, time))
}

/// Deterministic stand-in for a database engine.
#[derive(Debug, Clone, Copy)]
pub struct SimulatedBackend<'p> {
    profile: &'p TrueCostProfile,
}

impl<'p> SimulatedBackend<'p> {
    pub fn new(profile: &'p TrueCostProfile) -> Self {
        SimulatedBackend { profile }
    }

    pub fn profile(&self) -> &TrueCostProfile {
        self.profile
    }
}

impl ExecutionBackend for SimulatedBackend<'_> {
    fn explain(&mut self, query: &QuerySpec, units: &CostUnitVector) -> Result<Option<String>> {
        let (plan, _) = optimize(query, units)?;
        Ok(Some(plan.fingerprint().to_string()))
    }

    fn execute(&mut self, req: &ExecutionRequest<'_>) -> Result<ExecutionResult> {
        check_threshold(req.early_stop_threshold)?;
        let (plan, _) = optimize(req.query, &req.units)?;
        let t = true_time(&plan, req.query, self.profile)?;
        let fp = plan.into_fingerprint();
        Ok(ExecutionResult::from_run(fp, t, req.early_stop_threshold))
    }
}
