use std::collections::HashSet;

use super::plan::{JoinMethod, Plan, PlanNode, ScanMethod};
use super::query::QuerySpec;
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: usize = 4;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Every left-deep plan for `query`: all table orders, every scan method per
/// leaf, every join method per join. Intended as a brute-force oracle.
pub fn enumerate_all_plans(query: &QuerySpec, cap: usize) -> Result<Vec<Plan>> {
    query.validate()?;
    let n = query.tables.len();
    if n > cap {
        return Err(Error::TooLarge {
            what: "query for enumeration",
            size: n,
            cap,
        });
    }
    let scans: Vec<Vec<ScanMethod>> = query
        .tables
        .iter()
        .map(|t| {
            if t.table.has_index {
                vec![ScanMethod::Sequential, ScanMethod::Index]
            } else {
                vec![ScanMethod::Sequential]
            }
        })
        .collect();

    let mut seen = HashSet::new();
    let mut plans = Vec::new();
    for order in permutations(n) {
        // Partial trees built leaf by leaf along `order`.
        let mut partial: Vec<PlanNode> = scans[order[0]]
            .iter()
            .map(|&m| PlanNode::scan(query.tables[order[0]].table.name.clone(), m))
            .collect();
        for &t in &order[1..] {
            let name = &query.tables[t].table.name;
            let mut next = Vec::with_capacity(partial.len() * scans[t].len() * 2);
            for left in &partial {
                for &scan in &scans[t] {
                    for method in JoinMethod::ALL {
                        next.push(PlanNode::join(
                            method,
                            left.clone(),
                            PlanNode::scan(name.clone(), scan),
                        ));
                    }
                }
            }
            partial = next;
        }
        for root in partial {
            let plan = Plan::new(root);
            if seen.insert(plan.fingerprint().to_string()) {
                plans.push(plan);
            }
        }
    }
    Ok(plans)
}
