//! Synthetic workloads with a known fraction of improvable queries.
//!
//! A shared catalog feeds randomly drawn join queries. When any query is
//! planted, the hidden true units differ from the defaults and planted
//! queries also carry per-operator multipliers. Each query slot is filled by
//! rejection sampling: a planted query must admit a materially faster plan
//! that some reachable unit vector selects, and a clean query's default plan
//! must already be the fastest one.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::oracle::{ORACLE_TABLE_CAP, TIE_TOLERANCE};
use super::{SpaceMultipliers, WorkloadFile};
use crate::cost_units::{
    default_vector, log_uniform, sample_log_uniform, seeded_rng, CostUnitVector, SearchSpace,
    UNIT_COUNT,
};
use crate::error::{Error, Result};
use crate::exec::{fastest_plan, true_time, TrueCostProfile};
use crate::planner::{optimize, JoinEdge, OperatorKind, QuerySpec, QueryTable, TableSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub n_queries: usize,
    pub min_tables: usize,
    pub max_tables: usize,
    /// Fraction of queries planted with a reachable improvement.
    pub planted_fraction: f64,
    pub catalog_size: usize,
    /// Minimum oracle gain of a planted query.
    pub min_planted_gain: f64,
    /// Share of random unit vectors that must select the oracle plan.
    pub min_reachability: f64,
    pub reachability_samples: usize,
    /// Seconds per abstract cost unit.
    pub time_scale: f64,
    pub space: SpaceMultipliers,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            n_queries: 20,
            min_tables: 2,
            max_tables: 5,
            planted_fraction: 0.5,
            catalog_size: 24,
            min_planted_gain: 0.1,
            min_reachability: 0.05,
            reachability_samples: 128,
            time_scale: 1e-3,
            space: SpaceMultipliers::default(),
        }
    }
}

const PROFILE_ATTEMPTS: usize = 20;
const SLOT_ATTEMPTS: usize = 400;

impl GenConfig {
    fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Err(Error::validation(field, reason));
        if self.n_queries == 0 {
            return bad("n_queries", "must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.planted_fraction) {
            return bad("planted_fraction", format!("must lie in [0, 1], got {}", self.planted_fraction));
        }
        if self.min_tables == 0 || self.min_tables > self.max_tables {
            return bad("tables", format!("bad range {}..={}", self.min_tables, self.max_tables));
        }
        if self.max_tables > ORACLE_TABLE_CAP {
            return bad("max_tables", format!("oracle enumeration is capped at {ORACLE_TABLE_CAP}"));
        }
        if self.catalog_size < self.max_tables {
            return bad("catalog_size", "smaller than the largest query".into());
        }
        if !(self.time_scale.is_finite() && self.time_scale > 0.0) {
            return bad("time_scale", "must be positive".into());
        }
        if self.reachability_samples == 0 {
            return bad("reachability_samples", "must be at least 1".into());
        }
        Ok(())
    }

    pub fn planted_count(&self) -> usize {
        ((self.planted_fraction * self.n_queries as f64).round() as usize).min(self.n_queries)
    }
}

pub fn generate_workload(cfg: &GenConfig) -> Result<WorkloadFile> {
    cfg.validate()?;
    let defaults = default_vector();
    let space = crate::cost_units::make_search_space(&defaults, cfg.space.low, cfg.space.high)?;
    let mut rng = seeded_rng(cfg.seed, 0);
    let mut reach_rng = seeded_rng(cfg.seed, 1);

    let catalog = draw_catalog(cfg.catalog_size, &mut rng);
    let n_planted = cfg.planted_count();
    let mut planted = vec![false; cfg.n_queries];
    planted[..n_planted].iter_mut().for_each(|p| *p = true);
    planted.shuffle(&mut rng);

    for _ in 0..PROFILE_ATTEMPTS {
        let true_units = if n_planted == 0 {
            defaults
        } else {
            draw_true_units(&defaults, &mut rng)
        };
        let mut profile = TrueCostProfile {
            true_units,
            multipliers: BTreeMap::new(),
            time_scale: cfg.time_scale,
        };
        let mut queries = Vec::with_capacity(cfg.n_queries);
        let mut failed = false;
        for (slot, &want_planted) in planted.iter().enumerate() {
            let id = format!("q{:02}", slot + 1);
            let filled = (0..SLOT_ATTEMPTS).find_map(|_| {
                draw_slot(cfg, &id, want_planted, &catalog, &defaults, &space, &mut profile, &mut rng, &mut reach_rng)
                    .transpose()
            });
            match filled {
                Some(q) => queries.push(q?),
                None => {
                    failed = true;
                    break;
                }
            }
        }
        if !failed {
            let wf = WorkloadFile {
                name: format!("synthetic-{}", cfg.seed),
                defaults,
                space: cfg.space,
                true_profile: profile,
                queries,
            };
            wf.validate()?;
            return Ok(wf);
        }
    }
    Err(Error::Generation(format!(
        "could not fill {} queries ({} planted) for seed {}",
        cfg.n_queries, n_planted, cfg.seed
    )))
}

/// One attempt at filling a slot; `Ok(None)` means the draw was rejected.
#[allow(clippy::too_many_arguments)]
fn draw_slot(
    cfg: &GenConfig,
    id: &str,
    want_planted: bool,
    catalog: &[TableSpec],
    defaults: &CostUnitVector,
    space: &SearchSpace,
    profile: &mut TrueCostProfile,
    rng: &mut ChaCha8Rng,
    reach_rng: &mut ChaCha8Rng,
) -> Result<Option<QuerySpec>> {
    let query = draw_query(cfg, id, catalog, rng);
    profile.multipliers.remove(id);
    if want_planted {
        profile.multipliers.insert(id.to_string(), draw_multipliers(rng));
    }
    let (default_plan, _) = optimize(&query, defaults)?;
    let default_time = true_time(&default_plan, &query, profile)?;
    let (_, oracle_time) = fastest_plan(&query, profile)?;
    let accept = if want_planted {
        1.0 - oracle_time / default_time >= cfg.min_planted_gain
            && reachability(&query, profile, space, oracle_time, cfg.reachability_samples, reach_rng)?
                >= cfg.min_reachability
    } else {
        oracle_time >= default_time * (1.0 - TIE_TOLERANCE)
    };
    if accept {
        Ok(Some(query))
    } else {
        profile.multipliers.remove(id);
        Ok(None)
    }
}

fn draw_catalog(size: usize, rng: &mut ChaCha8Rng) -> Vec<TableSpec> {
    (0..size)
        .map(|i| {
            let rows = log_uniform(rng, 1e3, 2e6).round() as u64;
            let per_page = rng.gen_range(20..=120u64);
            TableSpec {
                name: format!("t{i:02}"),
                rows,
                pages: rows.div_ceil(per_page).max(1),
                has_index: rng.gen_bool(0.6),
            }
        })
        .collect()
}

fn draw_true_units(defaults: &CostUnitVector, rng: &mut ChaCha8Rng) -> CostUnitVector {
    let mut values = [0.0; UNIT_COUNT];
    for (v, d) in values.iter_mut().zip(defaults.values()) {
        *v = d * log_uniform(rng, 0.25, 4.0);
    }
    CostUnitVector::new(values).expect("scaled defaults stay positive")
}

fn draw_multipliers(rng: &mut ChaCha8Rng) -> BTreeMap<OperatorKind, f64> {
    OperatorKind::ALL
        .iter()
        .map(|&op| (op, log_uniform(rng, 0.8, 1.25)))
        .collect()
}

fn draw_query(cfg: &GenConfig, id: &str, catalog: &[TableSpec], rng: &mut ChaCha8Rng) -> QuerySpec {
    let k = rng.gen_range(cfg.min_tables..=cfg.max_tables);
    let chosen: Vec<&TableSpec> = catalog.choose_multiple(rng, k).collect();
    let tables: Vec<QueryTable> = chosen
        .iter()
        .map(|t| QueryTable {
            table: (*t).clone(),
            filter_sel: if rng.gen_bool(0.35) {
                1.0
            } else {
                log_uniform(rng, 1e-4, 0.5)
            },
        })
        .collect();
    let mut joins = Vec::with_capacity(k.saturating_sub(1));
    for j in 1..k {
        let parent = rng.gen_range(0..j);
        joins.push(join_edge(chosen[parent], chosen[j], rng));
    }
    QuerySpec {
        id: id.to_string(),
        tables,
        joins,
    }
}

/// Foreign-key style edge: roughly one match per row of the larger side.
fn join_edge(a: &TableSpec, b: &TableSpec, rng: &mut ChaCha8Rng) -> JoinEdge {
    let sel = (log_uniform(rng, 0.5, 3.0) / a.rows.max(b.rows) as f64).min(1.0);
    JoinEdge {
        a: a.name.clone(),
        b: b.name.clone(),
        sel,
    }
}

/// Share of random unit vectors whose plan runs as fast as the oracle plan.
fn reachability(
    query: &QuerySpec,
    profile: &TrueCostProfile,
    space: &SearchSpace,
    oracle_time: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut hits = 0usize;
    for _ in 0..samples {
        let units = sample_log_uniform(space, rng);
        let (plan, _) = optimize(query, &units)?;
        if true_time(&plan, query, profile)? <= oracle_time * (1.0 + 1e-9) {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}
