//! Plain-text graph and node-set formats.
//!
//! Edge list: a header line `n m` followed by exactly `m` lines `u v` with
//! whitespace-separated decimal ids. Blank lines and lines starting with `#`
//! are skipped. Id list: decimal ids separated by arbitrary whitespace.

use std::io::{BufRead, Write};

use super::{Graph, GraphError, NodeId};

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_id(token: &str, line: usize) -> Result<usize, GraphError> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("expected a non-negative integer, found `{token}`")))
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(line_no, format!("expected 2 fields, found {}", fields.len())));
        }
        let a = parse_id(fields[0], line_no)?;
        let b = parse_id(fields[1], line_no)?;
        match header {
            None => {
                header = Some((a, b));
                edges.reserve(b);
            }
            Some((_, m)) => {
                if edges.len() == m {
                    return Err(parse_err(line_no, format!("more than the declared {m} edges")));
                }
                edges.push((a, b));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(0, "missing `n m` header"))?;
    if edges.len() != m {
        return Err(parse_err(0, format!("declared {m} edges, found {}", edges.len())));
    }
    Graph::from_edges(n, &edges)
}

pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", g.node_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Reads a set of node ids; the result is sorted and duplicates are rejected.
pub fn read_id_list<R: BufRead>(reader: R) -> Result<Vec<NodeId>, GraphError> {
    let mut ids = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        for token in trimmed.split_whitespace() {
            ids.push(parse_id(token, idx + 1)?);
        }
    }
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(parse_err(0, format!("node {} listed twice", w[0])));
    }
    Ok(ids)
}

pub fn write_id_list<W: Write>(ids: &[NodeId], mut out: W) -> std::io::Result<()> {
    for id in ids {
        writeln!(out, "{id}")?;
    }
    Ok(())
}
