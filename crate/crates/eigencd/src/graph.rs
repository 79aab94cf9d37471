//! SNAP-style edge list ingestion.

use std::collections::HashSet;
use std::io::BufRead;

use crate::error::{Error, Result};

/// An undirected, deduplicated, self-loop-free graph on nodes `0..node_count`.
///
/// Node ids are used verbatim: `node_count` is one past the largest id seen,
/// so gaps in the id space become isolated nodes.
#[derive(Debug, Clone)]
pub struct EdgeGraph {
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
}

impl EdgeGraph {
    /// Per-node degrees.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.node_count];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }
}

/// Parses a SNAP edge list: lines starting with `#` are comments, data lines
/// hold two whitespace-separated nonnegative integers. Duplicate edges (in
/// either orientation) and self-loops are dropped.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<EdgeGraph> {
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut max_id: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let a = parse_node(tokens.next(), lineno)?;
        let b = parse_node(tokens.next(), lineno)?;
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("unexpected trailing token {extra:?}"),
            });
        }
        max_id = Some(max_id.map_or(a.max(b), |m| m.max(a).max(b)));
        if a == b {
            continue; // self-loop
        }
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            edges.push(key);
        }
    }

    match max_id {
        Some(m) => Ok(EdgeGraph {
            node_count: m + 1,
            edges,
        }),
        None => Err(Error::EmptyGraph),
    }
}

fn parse_node(token: Option<&str>, line: usize) -> Result<usize> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        msg: "expected two node ids".into(),
    })?;
    token.parse::<usize>().map_err(|_| Error::Parse {
        line,
        msg: format!("non-integer token {token:?}"),
    })
}
