//! Policies choosing which query receives the next trial.
//!
//! Every policy skips queries whose searcher is exhausted and returns `None`
//! once no query is left. Ties go to the earliest query in workload order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{QueryStats, WorkloadState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Scheduler {
    RoundRobin,
    CostBased,
    Ucb { lambda: f64 },
    ImprovementRate,
}

impl Scheduler {
    pub fn ucb() -> Self {
        Scheduler::Ucb {
            lambda: std::f64::consts::SQRT_2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Scheduler::RoundRobin => "round_robin",
            Scheduler::CostBased => "cost_based",
            Scheduler::Ucb { .. } => "ucb",
            Scheduler::ImprovementRate => "improvement_rate",
        }
    }

    pub fn select(&self, state: &mut WorkloadState) -> Option<usize> {
        match *self {
            Scheduler::RoundRobin => schedule_round_robin(state),
            Scheduler::CostBased => schedule_cost_based(state),
            Scheduler::Ucb { lambda } => schedule_ucb(state, lambda),
            Scheduler::ImprovementRate => schedule_improvement_rate(state),
        }
    }
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheduler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rr" | "round_robin" => Ok(Scheduler::RoundRobin),
            "cost" | "cost_based" => Ok(Scheduler::CostBased),
            "ucb" => Ok(Scheduler::ucb()),
            "rate" | "improvement_rate" => Ok(Scheduler::ImprovementRate),
            other => Err(Error::InvalidArgument(format!("unknown scheduler `{other}`"))),
        }
    }
}

fn argmax_active(state: &WorkloadState, score: impl Fn(&QueryStats) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in state.stats.iter().enumerate() {
        if s.exhausted {
            continue;
        }
        let v = score(s);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

fn first_unvisited(state: &WorkloadState) -> Option<usize> {
    state
        .stats
        .iter()
        .position(|s| !s.exhausted && s.f_q == 0)
}

/// Cycles through the workload in order.
pub fn schedule_round_robin(state: &mut WorkloadState) -> Option<usize> {
    let n = state.stats.len();
    for offset in 0..n {
        let i = (state.round_robin_cursor + offset) % n;
        if !state.stats[i].exhausted {
            state.round_robin_cursor = (i + 1) % n;
            return Some(i);
        }
    }
    None
}

/// The query with the slowest best time so far.
pub fn schedule_cost_based(state: &WorkloadState) -> Option<usize> {
    argmax_active(state, |s| s.best_time)
}

/// `max(1 - t/t0, 0)`.
pub fn reward(t: f64, t0: f64) -> Result<f64> {
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "default time must be positive, got {t0}"
        )));
    }
    Ok((1.0 - t / t0).max(0.0))
}

/// UCB1: unvisited queries first, then
/// `argmax mean_reward + lambda * sqrt(ln N / f_q)`.
pub fn schedule_ucb(state: &WorkloadState, lambda: f64) -> Option<usize> {
    if let Some(i) = first_unvisited(state) {
        return Some(i);
    }
    let ln_n = (state.total_trials() as f64).ln();
    argmax_active(state, |s| {
        s.average_reward() + lambda * (ln_n / s.f_q as f64).sqrt()
    })
}

/// Improvement over the default time so far, divided by trials spent.
pub fn improvement_rate(stats: &QueryStats) -> Result<f64> {
    if stats.f_q == 0 {
        return Err(Error::InvalidArgument(format!(
            "improvement rate of `{}` is undefined before its first trial",
            stats.query_id
        )));
    }
    let gain = (stats.default_time - stats.best_time).max(0.0);
    Ok(gain / stats.f_q as f64)
}

/// Unvisited queries first, then the highest improvement rate.
pub fn schedule_improvement_rate(state: &WorkloadState) -> Option<usize> {
    if let Some(i) = first_unvisited(state) {
        return Some(i);
    }
    argmax_active(state, |s| improvement_rate(s).unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_units::default_vector;
    use crate::qt::BudgetLedger;

    fn stats(id: &str, f_q: usize, default_time: f64, best_time: f64, rewards: &[f64]) -> QueryStats {
        QueryStats {
            query_id: id.into(),
            f_q,
            default_time,
            best_time,
            reward_history: rewards.to_vec(),
            best_units: default_vector(),
            exhausted: false,
        }
    }

    fn state(stats: Vec<QueryStats>) -> WorkloadState {
        WorkloadState {
            stats,
            ledger: BudgetLedger::new(100.0).unwrap(),
            round_robin_cursor: 0,
        }
    }

    #[test]
    fn round_robin_cycles() {
        let mut s = state(vec![
            stats("q1", 0, 1.0, 1.0, &[]),
            stats("q2", 0, 1.0, 1.0, &[]),
            stats("q3", 0, 1.0, 1.0, &[]),
        ]);
        let picks: Vec<_> = (0..5).map(|_| schedule_round_robin(&mut s).unwrap()).collect();
        assert_eq!(picks, vec![0, 1, 2, 0, 1]);

        let mut one = state(vec![stats("q1", 0, 1.0, 1.0, &[])]);
        assert_eq!(schedule_round_robin(&mut one), Some(0));
        assert_eq!(schedule_round_robin(&mut one), Some(0));
    }

    #[test]
    fn round_robin_skips_exhausted() {
        let mut s = state(vec![
            stats("q1", 0, 1.0, 1.0, &[]),
            stats("q2", 0, 1.0, 1.0, &[]),
        ]);
        s.stats[0].exhausted = true;
        assert_eq!(schedule_round_robin(&mut s), Some(1));
        assert_eq!(schedule_round_robin(&mut s), Some(1));
        s.stats[1].exhausted = true;
        assert_eq!(schedule_round_robin(&mut s), None);
    }

    #[test]
    fn cost_based_picks_slowest() {
        let mut s = state(vec![
            stats("q1", 1, 5.0, 5.0, &[]),
            stats("q2", 1, 9.0, 9.0, &[]),
            stats("q3", 1, 2.0, 2.0, &[]),
        ]);
        assert_eq!(schedule_cost_based(&s), Some(1));
        s.stats[1].best_time = 1.0;
        assert_eq!(schedule_cost_based(&s), Some(0));
        let equal = state(vec![stats("a", 1, 3.0, 3.0, &[]), stats("b", 1, 3.0, 3.0, &[])]);
        assert_eq!(schedule_cost_based(&equal), Some(0));
    }

    #[test]
    fn reward_examples() {
        assert_eq!(reward(5.0, 10.0).unwrap(), 0.5);
        assert_eq!(reward(12.0, 10.0).unwrap(), 0.0);
        assert_eq!(reward(10.0, 10.0).unwrap(), 0.0);
        assert!(reward(1.0, 0.0).is_err());
    }

    #[test]
    fn ucb_hand_evaluated() {
        let s = state(vec![
            stats("q1", 1, 10.0, 5.0, &[0.5]),
            stats("q2", 1, 10.0, 8.0, &[0.2]),
        ]);
        // 0.5 + sqrt(2) * sqrt(ln 2) = 1.6774 against 1.3774.
        let score = |r: f64| r + std::f64::consts::SQRT_2 * (2f64.ln()).sqrt();
        assert!((score(0.5) - 1.677).abs() < 1e-3);
        assert!((score(0.2) - 1.377).abs() < 1e-3);
        assert_eq!(schedule_ucb(&s, std::f64::consts::SQRT_2), Some(0));
    }

    #[test]
    fn ucb_prefers_less_explored_and_unvisited() {
        let s = state(vec![
            stats("q1", 4, 10.0, 10.0, &[0.25; 4]),
            stats("q2", 9, 10.0, 10.0, &[0.25; 9]),
        ]);
        assert_eq!(schedule_ucb(&s, std::f64::consts::SQRT_2), Some(0));
        let s = state(vec![
            stats("q1", 3, 10.0, 1.0, &[0.9; 3]),
            stats("q2", 0, 10.0, 10.0, &[]),
        ]);
        assert_eq!(schedule_ucb(&s, std::f64::consts::SQRT_2), Some(1));
    }

    #[test]
    fn improvement_rate_examples() {
        assert_eq!(improvement_rate(&stats("q", 2, 10.0, 6.0, &[])).unwrap(), 2.0);
        assert_eq!(improvement_rate(&stats("q", 2, 10.0, 10.0, &[])).unwrap(), 0.0);
        assert!(
            improvement_rate(&stats("q", 4, 10.0, 6.0, &[])).unwrap()
                < improvement_rate(&stats("q", 2, 10.0, 6.0, &[])).unwrap()
        );
        assert!(improvement_rate(&stats("q", 0, 10.0, 6.0, &[])).is_err());
    }

    #[test]
    fn improvement_rate_scheduler() {
        let s = state(vec![
            stats("q1", 1, 10.0, 8.0, &[]),
            stats("q2", 2, 10.0, 9.0, &[]),
            stats("q3", 1, 10.0, 10.0, &[]),
        ]);
        assert_eq!(schedule_improvement_rate(&s), Some(0));
        let flat = state(vec![stats("a", 1, 1.0, 1.0, &[]), stats("b", 1, 1.0, 1.0, &[])]);
        assert_eq!(schedule_improvement_rate(&flat), Some(0));
    }

    #[test]
    fn scheduler_names_parse() {
        assert_eq!("rr".parse::<Scheduler>().unwrap(), Scheduler::RoundRobin);
        assert_eq!("cost".parse::<Scheduler>().unwrap(), Scheduler::CostBased);
        assert_eq!("ucb".parse::<Scheduler>().unwrap(), Scheduler::ucb());
        assert_eq!("rate".parse::<Scheduler>().unwrap(), Scheduler::ImprovementRate);
        assert!("fifo".parse::<Scheduler>().is_err());
    }
}
