use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMethod {
    Sequential,
    Index,
}

impl ScanMethod {
    pub fn tag(self) -> &'static str {
        match self {
            ScanMethod::Sequential => "seq",
            ScanMethod::Index => "idx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JoinMethod {
    NestedLoop,
    Hash,
}

impl JoinMethod {
    pub const ALL: [JoinMethod; 2] = [JoinMethod::NestedLoop, JoinMethod::Hash];

    pub fn tag(self) -> &'static str {
        match self {
            JoinMethod::NestedLoop => "nl",
            JoinMethod::Hash => "hash",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PlanNode {
    Scan {
        table: String,
        method: ScanMethod,
    },
    Join {
        method: JoinMethod,
        left: Box<PlanNode>,
        right: Box<PlanNode>,
    },
}

impl PlanNode {
    pub fn scan(table: impl Into<String>, method: ScanMethod) -> Self {
        PlanNode::Scan {
            table: table.into(),
            method,
        }
    }

    pub fn join(method: JoinMethod, left: PlanNode, right: PlanNode) -> Self {
        PlanNode::Join {
            method,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn write_fingerprint(&self, out: &mut String) {
        match self {
            PlanNode::Scan { table, method } => {
                out.push_str("Scan(");
                out.push_str(method.tag());
                out.push(',');
                out.push_str(table);
                out.push(')');
            }
            PlanNode::Join {
                method,
                left,
                right,
            } => {
                out.push_str("Join(");
                out.push_str(method.tag());
                out.push_str(", ");
                left.write_fingerprint(out);
                out.push_str(", ");
                right.write_fingerprint(out);
                out.push(')');
            }
        }
    }

    /// Leaf table names, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            PlanNode::Scan { table, .. } => out.push(table),
            PlanNode::Join { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }
}

/// Canonical pre-order serialization of a plan tree, e.g.
/// `Join(hash, Scan(seq,A), Scan(idx,B))`.
pub fn fingerprint(root: &PlanNode) -> String {
    let mut out = String::new();
    root.write_fingerprint(&mut out);
    out
}

/// An operator tree together with its fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Plan {
    root: PlanNode,
    fingerprint: String,
}

impl Plan {
    pub fn new(root: PlanNode) -> Self {
        let fingerprint = fingerprint(&root);
        Plan { root, fingerprint }
    }

    pub fn root(&self) -> &PlanNode {
        &self.root
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn into_root(self) -> PlanNode {
        self.root
    }

    pub fn into_fingerprint(self) -> String {
        self.fingerprint
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fingerprint)
    }
}
