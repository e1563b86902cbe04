use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Running account of tuning time against a fixed budget.
///
/// `remaining()` is rounded so that charging it in full lands `spent` on
/// the budget without overshooting by an ulp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub budget: f64,
    pub spent: f64,
}

fn next_down(x: f64) -> f64 {
    if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else {
        x
    }
}

impl BudgetLedger {
    pub fn new(budget: f64) -> Result<Self> {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "budget must be a positive number of seconds, got {budget}"
            )));
        }
        Ok(BudgetLedger { budget, spent: 0.0 })
    }

    pub fn remaining(&self) -> f64 {
        let mut r = self.budget - self.spent;
        while r > 0.0 && self.spent + r > self.budget {
            r = next_down(r);
        }
        r.max(0.0)
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining() <= 0.0
    }

    pub fn charge(&mut self, amount: f64) -> Result<()> {
        if amount.is_nan() || amount < 0.0 || amount > self.remaining() {
            return Err(Error::InvalidArgument(format!(
                "charge of {amount}s exceeds remaining budget {}s",
                self.remaining()
            )));
        }
        self.spent += amount;
        debug_assert!(self.spent <= self.budget);
        Ok(())
    }
}

/// Best fully observed execution time per plan fingerprint.
#[derive(Debug, Clone, Default)]
pub struct PlanCache {
    times: HashMap<String, f64>,
}

impl PlanCache {
    pub fn get(&self, fingerprint: &str) -> Option<f64> {
        self.times.get(fingerprint).copied()
    }

    /// Only call with times from runs that were not stopped early.
    pub fn record(&mut self, fingerprint: &str, time: f64) {
        self.times
            .entry(fingerprint.to_string())
            .and_modify(|t| *t = t.min(time))
            .or_insert(time);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
