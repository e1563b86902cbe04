//! Adapter protocol for an external engine running as a child process.
//!
//! One JSON object per line in each direction, strictly request/response:
//!
//! ```text
//! -> {"query_id": "q1", "cost_units": {"seq_page_cost": 1.0, ...}, "timeout_ms": 2500}
//! <- {"plan_fingerprint": "Scan(seq,A)", "exec_ms": 812.0, "timed_out": false}
//! ```

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::{Deserialize, Serialize};

use super::{check_threshold, ExecutionBackend, ExecutionRequest, ExecutionResult};
use crate::cost_units::CostUnitVector;
use crate::error::{Error, Result};
use crate::planner::QuerySpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub query_id: String,
    pub cost_units: CostUnitVector,
    pub timeout_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireResponse {
    pub plan_fingerprint: String,
    pub exec_ms: f64,
    pub timed_out: bool,
}

impl WireRequest {
    /// Timeouts are rounded down to whole milliseconds so the engine never
    /// runs past the threshold.
    pub fn new(req: &ExecutionRequest<'_>) -> Self {
        WireRequest {
            query_id: req.query.id.clone(),
            cost_units: req.units,
            timeout_ms: req
                .early_stop_threshold
                .map(|s| (s * 1000.0).floor().max(0.0) as u64),
        }
    }
}

pub struct SubprocessBackend {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl SubprocessBackend {
    /// Spawns `command` with piped stdin/stdout.
    pub fn spawn(command: &mut Command) -> Result<Self> {
        let mut child = command
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Backend(format!("failed to start engine: {e}")))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = BufReader::new(child.stdout.take().expect("stdout is piped"));
        Ok(SubprocessBackend {
            child,
            stdin,
            stdout,
        })
    }

    fn round_trip(&mut self, request: &WireRequest) -> Result<WireResponse> {
        let mut line = serde_json::to_string(request)?;
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::Backend(format!("engine stdin closed: {e}")))?;

        let mut reply = String::new();
        let n = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| Error::Backend(format!("reading engine output: {e}")))?;
        if n == 0 {
            let status = self.child.try_wait().ok().flatten();
            return Err(Error::Backend(match status {
                Some(s) => format!("engine exited ({s}) before answering"),
                None => "engine closed its output before answering".into(),
            }));
        }
        let resp: WireResponse = serde_json::from_str(reply.trim_end())
            .map_err(|e| Error::Backend(format!("malformed engine response {:?}: {e}", reply.trim_end())))?;
        if !(resp.exec_ms.is_finite() && resp.exec_ms >= 0.0) {
            return Err(Error::Backend(format!(
                "engine reported invalid exec_ms {}",
                resp.exec_ms
            )));
        }
        Ok(resp)
    }
}

impl ExecutionBackend for SubprocessBackend {
    fn explain(&mut self, _query: &QuerySpec, _units: &CostUnitVector) -> Result<Option<String>> {
        Ok(None)
    }

    fn execute(&mut self, req: &ExecutionRequest<'_>) -> Result<ExecutionResult> {
        check_threshold(req.early_stop_threshold)?;
        let resp = self.round_trip(&WireRequest::new(req))?;
        let seconds = resp.exec_ms / 1000.0;
        Ok(match req.early_stop_threshold {
            Some(limit) if resp.timed_out || seconds >= limit => ExecutionResult {
                plan_fingerprint: resp.plan_fingerprint,
                true_time: seconds.max(limit),
                observed_time: limit,
                charged_time: limit,
                stopped_early: true,
            },
            _ => ExecutionResult::from_run(resp.plan_fingerprint, seconds, None),
        })
    }
}

impl Drop for SubprocessBackend {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
