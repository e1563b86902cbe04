//! Workload files, synthetic generation, exhaustive audits and budget sweeps.

mod file;
mod generate;
mod oracle;
mod sweep;

pub use file::{load_workload, parse_workload, save_workload, SpaceMultipliers, WorkloadFile};
pub use generate::{generate_workload, GenConfig};
pub use oracle::{audit_workload, oracle_query, OracleReport, QueryOracle, ORACLE_TABLE_CAP};
pub use sweep::{run_sweep, CellOutcome, SweepCell, SweepReport, SweepSpec};
