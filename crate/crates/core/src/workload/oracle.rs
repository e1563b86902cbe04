//! Exhaustive ground truth: every plan of a query timed under the true profile.

use serde::{Deserialize, Serialize};

use super::WorkloadFile;
use crate::cost_units::CostUnitVector;
use crate::error::Result;
use crate::exec::{true_time, TrueCostProfile};
use crate::planner::{enumerate_all_plans, optimize, QuerySpec};

/// Table cap for oracle enumeration; generated queries stay below it.
pub const ORACLE_TABLE_CAP: usize = 6;

/// Relative slack under which two times count as equal.
pub(crate) const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOracle {
    pub query_id: String,
    pub default_plan: String,
    pub default_time: f64,
    pub oracle_plan: String,
    pub oracle_time: f64,
    pub improvement: f64,
    pub plans_examined: usize,
}

impl QueryOracle {
    /// Some plan is strictly faster than the default one.
    pub fn improvable(&self) -> bool {
        self.oracle_time < self.default_time * (1.0 - TIE_TOLERANCE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub queries: Vec<QueryOracle>,
    pub workload_default_time: f64,
    pub workload_oracle_time: f64,
    pub improvement: f64,
    pub improvable_queries: usize,
}

pub fn oracle_query(
    query: &QuerySpec,
    defaults: &CostUnitVector,
    profile: &TrueCostProfile,
    cap: usize,
) -> Result<QueryOracle> {
    let (default_plan, _) = optimize(query, defaults)?;
    let default_time = true_time(&default_plan, query, profile)?;
    let plans = enumerate_all_plans(query, cap)?;
    let mut best: Option<(f64, &str)> = None;
    for plan in &plans {
        let t = true_time(plan, query, profile)?;
        let better = match best {
            None => true,
            Some((bt, bfp)) => t < bt || (t == bt && plan.fingerprint() < bfp),
        };
        if better {
            best = Some((t, plan.fingerprint()));
        }
    }
    let (oracle_time, oracle_plan) = best.expect("every query has at least one plan");
    Ok(QueryOracle {
        query_id: query.id.clone(),
        default_plan: default_plan.fingerprint().to_string(),
        default_time,
        oracle_plan: oracle_plan.to_string(),
        oracle_time,
        improvement: (1.0 - oracle_time / default_time).max(0.0),
        plans_examined: plans.len(),
    })
}

pub fn audit_workload(workload: &WorkloadFile, cap: usize) -> Result<OracleReport> {
    let queries = workload
        .queries
        .iter()
        .map(|q| oracle_query(q, &workload.defaults, &workload.true_profile, cap))
        .collect::<Result<Vec<_>>>()?;
    let workload_default_time: f64 = queries.iter().map(|q| q.default_time).sum();
    let workload_oracle_time: f64 = queries.iter().map(|q| q.oracle_time).sum();
    Ok(OracleReport {
        improvable_queries: queries.iter().filter(|q| q.improvable()).count(),
        improvement: (1.0 - workload_oracle_time / workload_default_time).max(0.0),
        queries,
        workload_default_time,
        workload_oracle_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::fastest_plan;
    use crate::workload::{generate_workload, GenConfig};

    #[test]
    fn exhaustive_and_dynamic_programming_agree() {
        let wf = generate_workload(&GenConfig {
            seed: 21,
            n_queries: 8,
            max_tables: 4,
            ..GenConfig::default()
        })
        .unwrap();
        let report = audit_workload(&wf, ORACLE_TABLE_CAP).unwrap();
        for (q, o) in wf.queries.iter().zip(&report.queries) {
            let (plan, time) = fastest_plan(q, &wf.true_profile).unwrap();
            assert_eq!(time, o.oracle_time, "{}", q.id);
            assert_eq!(plan.fingerprint(), o.oracle_plan, "{}", q.id);
        }
    }
}
