//! Random inputs shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use qtune::cost_units::{default_vector, make_search_space, sample_log_uniform, CostUnitVector, SearchSpace};
use qtune::exec::TrueCostProfile;
use qtune::planner::{JoinEdge, OperatorKind, QuerySpec, QueryTable, TableSpec};
use rand::Rng;

pub fn default_space() -> SearchSpace {
    make_search_space(&default_vector(), 0.1, 10.0).unwrap()
}

fn log_range<R: Rng>(rng: &mut R, low: f64, high: f64) -> f64 {
    rng.gen_range(low.ln()..=high.ln()).exp()
}

/// A connected query of 1 to `max_tables` tables named `A`, `B`, ...
pub fn random_query<R: Rng>(rng: &mut R, id: &str, max_tables: usize) -> QuerySpec {
    let n = rng.gen_range(1..=max_tables);
    let tables: Vec<QueryTable> = (0..n)
        .map(|i| {
            let rows = log_range(rng, 10.0, 1e6).round() as u64;
            QueryTable {
                table: TableSpec {
                    name: ((b'A' + i as u8) as char).to_string(),
                    rows,
                    pages: (rows / rng.gen_range(5..=150)).max(1),
                    has_index: rng.gen_bool(0.5),
                },
                filter_sel: if rng.gen_bool(0.3) { 1.0 } else { log_range(rng, 1e-4, 1.0) },
            }
        })
        .collect();
    let mut joins = Vec::new();
    for j in 1..n {
        let p = rng.gen_range(0..j);
        joins.push(JoinEdge {
            a: tables[p].table.name.clone(),
            b: tables[j].table.name.clone(),
            sel: log_range(rng, 1e-6, 1.0),
        });
    }
    if n >= 3 && rng.gen_bool(0.3) {
        joins.push(JoinEdge {
            a: tables[0].table.name.clone(),
            b: tables[n - 1].table.name.clone(),
            sel: log_range(rng, 1e-3, 1.0),
        });
    }
    QuerySpec {
        id: id.to_string(),
        tables,
        joins,
    }
}

pub fn random_workload<R: Rng>(rng: &mut R, n: usize, max_tables: usize) -> Vec<QuerySpec> {
    (0..n)
        .map(|i| random_query(rng, &format!("q{}", i + 1), max_tables))
        .collect()
}

pub fn random_units<R: Rng>(rng: &mut R) -> CostUnitVector {
    sample_log_uniform(&default_space(), rng)
}

/// Distorted truth: random units plus per-query operator multipliers.
pub fn random_profile<R: Rng>(rng: &mut R, workload: &[QuerySpec]) -> TrueCostProfile {
    let mut multipliers = BTreeMap::new();
    for q in workload {
        if rng.gen_bool(0.5) {
            let ops = OperatorKind::ALL
                .iter()
                .map(|&op| (op, log_range(rng, 0.5, 2.0)))
                .collect();
            multipliers.insert(q.id.clone(), ops);
        }
    }
    TrueCostProfile {
        true_units: random_units(rng),
        multipliers,
        time_scale: log_range(rng, 1e-5, 1e-2),
    }
}

use qtune::qt::BudgetLedger;
use qtune::wt::{QueryStats, WorkloadState};

/// Random scheduler state with some exhausted queries and deliberate ties.
pub fn random_state<R: Rng>(rng: &mut R) -> WorkloadState {
    let n = rng.gen_range(1..=8);
    let tie_value = log_range(rng, 0.1, 100.0);
    let stats = (0..n)
        .map(|i| {
            let default_time = if rng.gen_bool(0.2) { tie_value } else { log_range(rng, 0.1, 100.0) };
            let f_q = if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..=12) };
            let best_time = if rng.gen_bool(0.3) {
                default_time
            } else {
                default_time * rng.gen_range(0.05..=1.0)
            };
            let reward_history = (0..f_q)
                .map(|_| if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(0.0..1.0) })
                .collect();
            QueryStats {
                query_id: format!("q{i}"),
                f_q,
                default_time,
                best_time,
                reward_history,
                best_units: default_vector(),
                exhausted: rng.gen_bool(0.1),
            }
        })
        .collect();
    WorkloadState {
        stats,
        ledger: BudgetLedger::new(1.0).unwrap(),
        round_robin_cursor: 0,
    }
}

/// Highest score wins; the first index wins ties. Exhausted queries never win.
fn brute_argmax(state: &WorkloadState, score: impl Fn(&QueryStats) -> f64) -> Option<usize> {
    let active: Vec<usize> = (0..state.stats.len()).filter(|&i| !state.stats[i].exhausted).collect();
    let top = active
        .iter()
        .map(|&i| score(&state.stats[i]))
        .fold(f64::NEG_INFINITY, f64::max);
    active.into_iter().find(|&i| score(&state.stats[i]) == top)
}

pub fn brute_ucb(state: &WorkloadState, lambda: f64) -> Option<usize> {
    if let Some(i) = (0..state.stats.len()).find(|&i| !state.stats[i].exhausted && state.stats[i].f_q == 0) {
        return Some(i);
    }
    let n: usize = state.stats.iter().map(|s| s.f_q).sum();
    brute_argmax(state, |s| {
        let mean = s.reward_history.iter().sum::<f64>() / s.f_q as f64;
        mean + lambda * ((n as f64).ln() / s.f_q as f64).sqrt()
    })
}

pub fn brute_cost_based(state: &WorkloadState) -> Option<usize> {
    brute_argmax(state, |s| s.best_time)
}

pub fn brute_improvement_rate(state: &WorkloadState) -> Option<usize> {
    if let Some(i) = (0..state.stats.len()).find(|&i| !state.stats[i].exhausted && state.stats[i].f_q == 0) {
        return Some(i);
    }
    brute_argmax(state, |s| f64::max(s.default_time - s.best_time, 0.0) / s.f_q as f64)
}

/// Exact minimum estimated cost over every plan, and the smallest
/// fingerprint attaining it.
pub fn enumerated_minimum(query: &QuerySpec, units: &CostUnitVector) -> (f64, String) {
    let plans = qtune::planner::enumerate_all_plans(query, 6).unwrap();
    let mut best: Option<(f64, String)> = None;
    for p in &plans {
        let c = qtune::planner::evaluate_plan(p, query, units).unwrap().total;
        let better = match &best {
            None => true,
            Some((bc, bfp)) => c < *bc || (c == *bc && p.fingerprint() < bfp.as_str()),
        };
        if better {
            best = Some((c, p.fingerprint().to_string()));
        }
    }
    best.unwrap()
}
