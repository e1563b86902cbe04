use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TrialRecord;
use crate::cost_units::{grid_points, sample_log_uniform, seeded_rng, CostUnitVector, SearchSpace, DEFAULT_GRID_CAP};
use crate::error::Result;

/// Proposes the next cost-unit vector to try, or `None` once exhausted.
pub trait Searcher {
    fn next(&mut self, history: &[TrialRecord]) -> Option<CostUnitVector>;
}

/// Log-uniform random search. Never exhausted.
#[derive(Debug, Clone)]
pub struct RandomSearcher {
    space: SearchSpace,
    rng: ChaCha8Rng,
}

impl RandomSearcher {
    pub fn new(space: SearchSpace, seed: u64, stream: u64) -> Self {
        RandomSearcher {
            space,
            rng: seeded_rng(seed, stream),
        }
    }
}

impl Searcher for RandomSearcher {
    fn next(&mut self, _history: &[TrialRecord]) -> Option<CostUnitVector> {
        Some(sample_log_uniform(&self.space, &mut self.rng))
    }
}

/// Walks the geometric grid in lexicographic order, then stops.
#[derive(Debug, Clone)]
pub struct GridSearcher {
    points: Vec<CostUnitVector>,
    cursor: usize,
}

impl GridSearcher {
    pub fn new(space: &SearchSpace, k: usize) -> Result<Self> {
        Ok(GridSearcher {
            points: grid_points(space, k, DEFAULT_GRID_CAP)?,
            cursor: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Searcher for GridSearcher {
    fn next(&mut self, _history: &[TrialRecord]) -> Option<CostUnitVector> {
        let p = self.points.get(self.cursor).copied();
        self.cursor += 1;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearcherConfig {
    Random { seed: u64 },
    Grid { k: usize },
}

impl SearcherConfig {
    /// Builds a searcher; `stream` separates independent random sequences
    /// (one per query in a workload) under the same seed.
    pub fn build(&self, space: &SearchSpace, stream: u64) -> Result<Box<dyn Searcher + Send>> {
        Ok(match *self {
            SearcherConfig::Random { seed } => Box::new(RandomSearcher::new(*space, seed, stream)),
            SearcherConfig::Grid { k } => Box::new(GridSearcher::new(space, k)?),
        })
    }
}
