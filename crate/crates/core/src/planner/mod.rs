//! A miniature cost-based optimizer over left-deep join trees.

mod cost;
mod enumerate;
mod optimize;
mod plan;
mod query;

pub use cost::{cost_join, cost_scan, evaluate_plan, OperatorKind, PlanCost};
pub(crate) use cost::evaluate_weighted;
pub(crate) use optimize::optimize_weighted;
pub use enumerate::{enumerate_all_plans, DEFAULT_ENUMERATION_CAP};
pub use optimize::{optimize, MAX_OPTIMIZER_TABLES};
pub use plan::{fingerprint, JoinMethod, Plan, PlanNode, ScanMethod};
pub use query::{estimate_cardinality, JoinEdge, QuerySpec, QueryTable, TableSet, TableSpec};

#[cfg(test)]
pub(crate) use query::fixtures;
