//! Budget-aware tuning of query optimizer cost units.
//!
//! Cost units (the per-operation constants of a cost model) are treated as
//! hyper-parameters. A tuner proposes unit vectors, the optimizer turns each
//! into a plan, and the plan is executed under a time budget. Single queries
//! are tuned with [`qt::tune_query`]; workloads share one budget across
//! queries through a scheduler in [`wt::tune_workload`].

pub mod cost_units;
pub mod error;
pub mod exec;
pub mod planner;
pub mod qt;
pub mod workload;
pub mod wt;

pub use error::{Error, Result};
