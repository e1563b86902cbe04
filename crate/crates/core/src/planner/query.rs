use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub name: String,
    pub rows: u64,
    pub pages: u64,
    pub has_index: bool,
}

/// A table as referenced by one query, with the query's filter on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTable {
    #[serde(flatten)]
    pub table: TableSpec,
    pub filter_sel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinEdge {
    pub a: String,
    pub b: String,
    pub sel: f64,
}

/// A select-project-join query described by its join graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub id: String,
    pub tables: Vec<QueryTable>,
    #[serde(default)]
    pub joins: Vec<JoinEdge>,
}

/// Bitmask over a query's tables, bit `i` standing for `tables[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TableSet(pub u64);

impl TableSet {
    pub const EMPTY: TableSet = TableSet(0);

    pub fn single(i: usize) -> Self {
        TableSet(1 << i)
    }

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            TableSet(u64::MAX)
        } else {
            TableSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        TableSet(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Self {
        TableSet(self.0 & !(1 << i))
    }

    pub fn union(self, other: TableSet) -> Self {
        TableSet(self.0 | other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }
}

fn is_identifier(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '$'))
}

fn valid_selectivity(s: f64) -> bool {
    s > 0.0 && s <= 1.0
}

impl QuerySpec {
    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.table.name == name)
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Checks every structural invariant: at least one table, unique
    /// identifier-safe names, sizes and selectivities in range, join edges
    /// over known tables, and a connected join graph.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::invalid_query(&self.id, reason));
        if !is_identifier(&self.id) {
            return fail(format!("query id `{}` is not a valid identifier", self.id));
        }
        if self.tables.is_empty() {
            return fail("query references no tables".into());
        }
        if self.tables.len() > 64 {
            return fail(format!("{} tables exceed the 64-table limit", self.tables.len()));
        }
        let mut seen = HashSet::new();
        for qt in &self.tables {
            let t = &qt.table;
            if !is_identifier(&t.name) {
                return fail(format!("table name `{}` is not a valid identifier", t.name));
            }
            if !seen.insert(t.name.as_str()) {
                return fail(format!("table `{}` appears twice", t.name));
            }
            if t.rows < 1 || t.pages < 1 {
                return fail(format!("table `{}` needs rows >= 1 and pages >= 1", t.name));
            }
            if !valid_selectivity(qt.filter_sel) {
                return fail(format!(
                    "table `{}` filter_sel {} outside (0, 1]",
                    t.name, qt.filter_sel
                ));
            }
        }
        for e in &self.joins {
            let edge = format!("{}-{}", e.a, e.b);
            for end in [&e.a, &e.b] {
                if self.table_index(end).is_none() {
                    return fail(format!("join edge {edge} names absent table `{end}`"));
                }
            }
            if e.a == e.b {
                return fail(format!("join edge {edge} is a self-loop"));
            }
            if !valid_selectivity(e.sel) {
                return fail(format!("join edge {edge} selectivity {} outside (0, 1]", e.sel));
            }
        }
        if !self.is_connected() {
            return fail("join graph is disconnected".into());
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let graph = QueryGraph::new(self);
        let mut reached = TableSet::single(0);
        loop {
            let mut next = reached;
            for &(a, b, _) in &graph.edges {
                if reached.contains(a) || reached.contains(b) {
                    next = next.with(a).with(b);
                }
            }
            if next == reached {
                break;
            }
            reached = next;
        }
        reached == TableSet::full(self.tables.len())
    }
}

/// Join edges resolved to table indices. Assumes a validated query.
pub(crate) struct QueryGraph<'q> {
    pub query: &'q QuerySpec,
    pub edges: Vec<(usize, usize, f64)>,
}

impl<'q> QueryGraph<'q> {
    pub fn new(query: &'q QuerySpec) -> Self {
        let edges = query
            .joins
            .iter()
            .filter_map(|e| Some((query.table_index(&e.a)?, query.table_index(&e.b)?, e.sel)))
            .collect();
        QueryGraph { query, edges }
    }

    /// Independence-model cardinality of the subset. Tables multiply in
    /// index order and edges in declaration order, so the result depends on
    /// the subset alone.
    pub fn cardinality(&self, set: TableSet) -> f64 {
        let mut card = 1.0;
        for i in set.iter().take_while(|&i| i < self.query.tables.len()) {
            let t = &self.query.tables[i];
            card *= t.table.rows as f64 * t.filter_sel;
        }
        for &(a, b, sel) in &self.edges {
            if set.contains(a) && set.contains(b) {
                card *= sel;
            }
        }
        card
    }
}

/// Estimated output rows of joining `tables` (names from `query`).
pub fn estimate_cardinality(query: &QuerySpec, tables: &[&str]) -> Result<f64> {
    if tables.is_empty() {
        return Err(Error::InvalidArgument("table subset must be non-empty".into()));
    }
    let mut set = TableSet::EMPTY;
    for name in tables {
        let i = query.table_index(name).ok_or_else(|| {
            Error::invalid_query(&query.id, format!("table `{name}` is not part of the query"))
        })?;
        set = set.with(i);
    }
    Ok(QueryGraph::new(query).cardinality(set))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn table(name: &str, rows: u64, pages: u64, has_index: bool, filter_sel: f64) -> QueryTable {
        QueryTable {
            table: TableSpec {
                name: name.into(),
                rows,
                pages,
                has_index,
            },
            filter_sel,
        }
    }

    pub fn edge(a: &str, b: &str, sel: f64) -> JoinEdge {
        JoinEdge {
            a: a.into(),
            b: b.into(),
            sel,
        }
    }

    pub fn query(id: &str, tables: Vec<QueryTable>, joins: Vec<JoinEdge>) -> QuerySpec {
        QuerySpec {
            id: id.into(),
            tables,
            joins,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn cardinality_examples() {
        let q = query("q", vec![table("A", 1000, 100, false, 0.1)], vec![]);
        assert_eq!(estimate_cardinality(&q, &["A"]).unwrap(), 100.0);

        let q = query(
            "q",
            vec![table("A", 1000, 100, false, 1.0), table("B", 500, 50, false, 1.0)],
            vec![edge("A", "B", 0.002)],
        );
        assert_eq!(estimate_cardinality(&q, &["A", "B"]).unwrap(), 1000.0);
        assert_eq!(
            estimate_cardinality(&q, &["B", "A"]).unwrap(),
            estimate_cardinality(&q, &["A", "B"]).unwrap()
        );
    }

    #[test]
    fn cardinality_without_internal_edges_is_row_product() {
        let q = query(
            "q",
            vec![
                table("A", 10, 1, false, 1.0),
                table("B", 20, 1, false, 1.0),
                table("C", 30, 1, false, 1.0),
            ],
            vec![edge("A", "B", 0.5), edge("B", "C", 0.5)],
        );
        assert_eq!(estimate_cardinality(&q, &["A", "C"]).unwrap(), 300.0);
        assert!(estimate_cardinality(&q, &[]).is_err());
        assert!(estimate_cardinality(&q, &["Z"]).is_err());
    }

    #[test]
    fn validation_names_offending_edge() {
        let q = query(
            "q1",
            vec![table("A", 10, 1, false, 1.0)],
            vec![edge("A", "Missing", 0.1)],
        );
        let err = q.validate().unwrap_err().to_string();
        assert!(err.contains("A-Missing"), "{err}");
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let disconnected = query(
            "q",
            vec![table("A", 10, 1, false, 1.0), table("B", 10, 1, false, 1.0)],
            vec![],
        );
        assert!(disconnected.validate().unwrap_err().to_string().contains("disconnected"));
        assert!(query("q", vec![], vec![]).validate().is_err());
        assert!(query("q", vec![table("A", 10, 1, false, 0.0)], vec![]).validate().is_err());
        assert!(query("q", vec![table("A", 0, 1, false, 0.5)], vec![]).validate().is_err());
        assert!(query("q", vec![table("A(", 1, 1, false, 0.5)], vec![]).validate().is_err());
        let dup = query(
            "q",
            vec![table("A", 10, 1, false, 1.0), table("A", 10, 1, false, 1.0)],
            vec![edge("A", "A", 0.5)],
        );
        assert!(dup.validate().is_err());
        let bad_sel = query(
            "q",
            vec![table("A", 10, 1, false, 1.0), table("B", 10, 1, false, 1.0)],
            vec![edge("A", "B", 1.5)],
        );
        assert!(bad_sel.validate().is_err());
    }

    #[test]
    fn json_shape() {
        let json = r#"{"id":"q1","tables":[{"name":"A","rows":10,"pages":2,"has_index":true,"filter_sel":0.5}],
                       "joins":[]}"#;
        let q: QuerySpec = serde_json::from_str(json).unwrap();
        assert_eq!(q.tables[0].table.pages, 2);
        assert!(q.tables[0].table.has_index);
        let back = serde_json::to_value(&q).unwrap();
        assert_eq!(back["tables"][0]["filter_sel"], 0.5);
        assert_eq!(back["tables"][0]["name"], "A");
    }
}
