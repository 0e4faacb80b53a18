//! Edge-list text format.
//!
//! One `u v` pair per line, `#` starts a comment, blank lines are ignored.
//! An optional `p <n> <m>` header fixes the vertex and edge counts. With a
//! header, labels that are all integers in `0..n` are used as vertex ids
//! directly; otherwise labels are mapped to ids in first-seen order.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::Graph;
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "p" {
            if header.is_some() || !pairs.is_empty() {
                return Err(parse_err(line_no, "header must precede all edges"));
            }
            if fields.len() != 3 {
                return Err(parse_err(line_no, "header must be `p <n> <m>`"));
            }
            let n = fields[1]
                .parse()
                .map_err(|_| parse_err(line_no, "bad vertex count"))?;
            let m = fields[2]
                .parse()
                .map_err(|_| parse_err(line_no, "bad edge count"))?;
            header = Some((n, m));
            continue;
        }
        if fields.len() != 2 {
            return Err(parse_err(line_no, "expected exactly two labels"));
        }
        pairs.push((line_no, fields[0], fields[1]));
    }

    let numeric_ids = header.and_then(|(n, _)| {
        pairs
            .iter()
            .flat_map(|&(_, a, b)| [a, b])
            .map(|l| l.parse::<usize>().ok().filter(|&id| id < n))
            .collect::<Option<Vec<_>>>()
    });

    let mut edges = Vec::with_capacity(pairs.len());
    let n = if let Some(ids) = numeric_ids {
        edges.extend(ids.chunks_exact(2).map(|c| (c[0], c[1])));
        header.map(|(n, _)| n).unwrap_or(0)
    } else {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        for &(_, a, b) in &pairs {
            let next = ids.len();
            let ia = *ids.entry(a).or_insert(next);
            let next = ids.len();
            let ib = *ids.entry(b).or_insert(next);
            edges.push((ia, ib));
        }
        match header {
            Some((n, _)) if n < ids.len() => {
                return Err(parse_err(0, "more labels than the header's vertex count"));
            }
            Some((n, _)) => n,
            None => ids.len(),
        }
    };
    if let Some((_, m)) = header {
        if m != edges.len() {
            return Err(parse_err(
                0,
                &format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
    }
    Graph::from_edges(n, &edges).map_err(|e| {
        let line = match &e {
            Error::InvalidEdge(u, v, _) => edges
                .iter()
                .position(|&(a, b)| (a.min(b), a.max(b)) == (*u, *v))
                .map(|i| pairs[i].0)
                .unwrap_or(0),
            _ => 0,
        };
        parse_err(line, &e.to_string())
    })
}

/// Writes the canonical form: header followed by sorted edges.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("p {} {}\n", g.vertex_count(), g.edge_count());
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}").expect("writing to a String");
    }
    out
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}
