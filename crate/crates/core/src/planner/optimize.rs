//! Left-deep join enumeration by dynamic programming over table subsets.
//!
//! Both join formulas are nondecreasing in the cost of the left input and
//! the left input's row count depends only on its table set, so keeping the
//! cheapest plan per subset is exact. Ties are broken by the smaller
//! fingerprint at every level, which yields the globally smallest
//! fingerprint among minimum-cost plans.

use std::cmp::Ordering;

use super::cost::{join_weighted, scan_weighted, OperatorKind, PlanCost};
use super::plan::{JoinMethod, Plan, PlanNode, ScanMethod};
use super::query::{QueryGraph, QuerySpec, TableSet};
use crate::cost_units::CostUnitVector;
use crate::error::{Error, Result};

/// Largest query `optimize` accepts; the table is `2^n` entries.
pub const MAX_OPTIMIZER_TABLES: usize = 20;

#[derive(Clone)]
struct Entry {
    cost: PlanCost,
    plan: Plan,
}

fn better(cost: f64, fp: &str, incumbent: &Option<Entry>) -> bool {
    match incumbent {
        None => true,
        Some(e) => match cost.partial_cmp(&e.cost.total) {
            Some(Ordering::Less) => true,
            Some(Ordering::Equal) => fp < e.plan.fingerprint(),
            _ => false,
        },
    }
}

fn scan_options(has_index: bool) -> &'static [ScanMethod] {
    if has_index {
        &[ScanMethod::Sequential, ScanMethod::Index]
    } else {
        &[ScanMethod::Sequential]
    }
}

fn offer(slot: &mut Option<Entry>, cost: PlanCost, build: impl FnOnce() -> PlanNode) {
    let beats_on_cost = match slot {
        None => true,
        Some(e) => cost.total <= e.cost.total,
    };
    if !beats_on_cost {
        return;
    }
    let plan = Plan::new(build());
    if better(cost.total, plan.fingerprint(), slot) {
        *slot = Some(Entry { cost, plan });
    }
}

/// Returns the cheapest left-deep plan for `query` under `units`.
pub fn optimize(query: &QuerySpec, units: &CostUnitVector) -> Result<(Plan, PlanCost)> {
    optimize_weighted(query, units, &|_| 1.0)
}

/// [`optimize`] with per-operator cost weights. Positive weights keep the
/// subset recurrence exact.
pub(crate) fn optimize_weighted(
    query: &QuerySpec,
    units: &CostUnitVector,
    weight: &dyn Fn(OperatorKind) -> f64,
) -> Result<(Plan, PlanCost)> {
    query.validate()?;
    let n = query.tables.len();
    if n > MAX_OPTIMIZER_TABLES {
        return Err(Error::TooLarge {
            what: "query",
            size: n,
            cap: MAX_OPTIMIZER_TABLES,
        });
    }
    let graph = QueryGraph::new(query);
    let mut best: Vec<Option<Entry>> = vec![None; 1 << n];

    for (i, qt) in query.tables.iter().enumerate() {
        let slot = &mut best[TableSet::single(i).0 as usize];
        for &method in scan_options(qt.table.has_index) {
            let cost = scan_weighted(&qt.table, qt.filter_sel, method, units, weight(method.into()))?;
            offer(slot, cost, || PlanNode::scan(qt.table.name.clone(), method));
        }
    }

    for mask in 1u64..(1u64 << n) {
        let set = TableSet(mask);
        if set.len() < 2 {
            continue;
        }
        let output_rows = graph.cardinality(set);
        let mut slot: Option<Entry> = None;
        for t in set.iter() {
            let left = best[set.without(t).0 as usize]
                .as_ref()
                .expect("every smaller subset is populated");
            let qt = &query.tables[t];
            for &scan in scan_options(qt.table.has_index) {
                let right = scan_weighted(&qt.table, qt.filter_sel, scan, units, weight(scan.into()))?;
                for method in JoinMethod::ALL {
                    let cost = join_weighted(left.cost, right, output_rows, method, units, weight(method.into()));
                    offer(&mut slot, cost, || {
                        PlanNode::join(
                            method,
                            left.plan.root().clone(),
                            PlanNode::scan(qt.table.name.clone(), scan),
                        )
                    });
                }
            }
        }
        best[mask as usize] = slot;
    }

    let top = best
        .pop()
        .flatten()
        .expect("full table set is always populated");
    Ok((top.plan, top.cost))
}
