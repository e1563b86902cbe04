use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost_units::{make_search_space, CostUnitVector, SearchSpace};
use crate::error::{Error, Result};
use crate::exec::TrueCostProfile;
use crate::planner::QuerySpec;

/// Multipliers applied to the defaults to bound each unit's search interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceMultipliers {
    pub low: f64,
    pub high: f64,
}

impl Default for SpaceMultipliers {
    fn default() -> Self {
        SpaceMultipliers {
            low: 0.1,
            high: 10.0,
        }
    }
}

/// A workload together with the hidden timing model used to execute it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadFile {
    pub name: String,
    pub defaults: CostUnitVector,
    #[serde(default)]
    pub space: SpaceMultipliers,
    pub true_profile: TrueCostProfile,
    pub queries: Vec<QuerySpec>,
}

impl WorkloadFile {
    pub fn validate(&self) -> Result<()> {
        if self.queries.is_empty() {
            return Err(Error::validation("queries", "workload has no queries"));
        }
        let mut ids = HashSet::new();
        for (i, q) in self.queries.iter().enumerate() {
            if !ids.insert(q.id.as_str()) {
                return Err(Error::validation(
                    format!("queries[{i}].id"),
                    format!("duplicate query id `{}`", q.id),
                ));
            }
            q.validate()?;
        }
        self.true_profile.validate()?;
        if let Some(unknown) = self
            .true_profile
            .multipliers
            .keys()
            .find(|id| !ids.contains(id.as_str()))
        {
            return Err(Error::validation(
                format!("true_profile.multipliers.{unknown}"),
                "references an unknown query id",
            ));
        }
        let space = self.search_space().map_err(|e| match e {
            Error::InvalidArgument(reason) => Error::validation("space", reason),
            other => other,
        })?;
        debug_assert!(space.contains(&self.defaults));
        Ok(())
    }

    pub fn search_space(&self) -> Result<SearchSpace> {
        make_search_space(&self.defaults, self.space.low, self.space.high)
    }

    pub fn query(&self, id: &str) -> Option<&QuerySpec> {
        self.queries.iter().find(|q| q.id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn parse_workload(text: &str) -> Result<WorkloadFile> {
    let wf: WorkloadFile = serde_json::from_str(text)?;
    wf.validate()?;
    Ok(wf)
}

pub fn load_workload(path: impl AsRef<Path>) -> Result<WorkloadFile> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_workload(&text)
}

pub fn save_workload(workload: &WorkloadFile, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, workload.to_json()?)?;
    Ok(())
}
