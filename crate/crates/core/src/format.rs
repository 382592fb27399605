//! DAG and loss-vector file formats.
//!
//! Text: first line `n m src dst`, then `m` lines `tail head`. Blank lines
//! and lines starting with `#` are skipped. JSON: `{"vertices", "edges",
//! "source", "sink"}` where `vertices` is a count or a list of labels.
//! Loss vectors are CSV rows `edge_index,weight`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dag;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Vertices {
    Count(usize),
    Labels(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DagJson {
    pub vertices: Vertices,
    pub edges: Vec<(usize, usize)>,
    pub source: usize,
    pub sink: usize,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn numbers(line: usize, s: &str, want: usize) -> Result<Vec<usize>> {
    let v = s
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(line, format!("bad integer `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != want {
        return Err(parse_err(line, format!("expected {want} integers, got {}", v.len())));
    }
    Ok(v)
}

pub fn parse_dag_text(text: &str) -> Result<Dag> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let h = numbers(ln, header, 4)?;
    let (n, m, s, t) = (h[0], h[1], h[2], h[3]);
    let mut edges = Vec::with_capacity(m);
    for (ln, l) in lines {
        if edges.len() == m {
            return Err(parse_err(ln, format!("more than {m} edges")));
        }
        let e = numbers(ln, l, 2)?;
        edges.push((e[0], e[1]));
    }
    if edges.len() != m {
        return Err(parse_err(0, format!("expected {m} edges, found {}", edges.len())));
    }
    Dag::new(n, edges, s, t)
}

pub fn parse_dag_json(text: &str) -> Result<Dag> {
    let j: DagJson = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    let n = match j.vertices {
        Vertices::Count(n) => n,
        Vertices::Labels(l) => l.len(),
    };
    Dag::new(n, j.edges, j.source, j.sink)
}

/// Parses either format, picking JSON when the first non-blank character is
/// `{`.
pub fn parse_dag(text: &str) -> Result<Dag> {
    if text.trim_start().starts_with('{') {
        parse_dag_json(text)
    } else {
        parse_dag_text(text)
    }
}

pub fn dag_to_text(dag: &Dag) -> String {
    let mut out = format!(
        "{} {} {} {}\n",
        dag.num_vertices(),
        dag.num_edges(),
        dag.source(),
        dag.sink()
    );
    for &(u, v) in dag.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn dag_to_json(dag: &Dag) -> DagJson {
    DagJson {
        vertices: Vertices::Count(dag.num_vertices()),
        edges: dag.edges().to_vec(),
        source: dag.source(),
        sink: dag.sink(),
    }
}

/// Reads `edge_index,weight` rows into a dense vector of length `m`. An
/// optional header row is skipped; missing edges get weight 0.
pub fn parse_loss_csv(text: &str, m: usize) -> Result<Vec<f64>> {
    let mut w = vec![0.0; m];
    let mut seen = vec![false; m];
    for (ln, l) in content_lines(text) {
        let mut parts = l.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(ln, "expected `edge_index,weight`"));
        };
        let Ok(e) = a.parse::<usize>() else {
            if ln == 1 {
                continue;
            }
            return Err(parse_err(ln, format!("bad edge index `{a}`")));
        };
        let x: f64 = b.parse().map_err(|_| parse_err(ln, format!("bad weight `{b}`")))?;
        if e >= m {
            return Err(parse_err(ln, format!("edge {e} out of range (m = {m})")));
        }
        if seen[e] {
            return Err(parse_err(ln, format!("edge {e} listed twice")));
        }
        seen[e] = true;
        w[e] = x;
    }
    Ok(w)
}

pub fn loss_to_csv(w: &[f64]) -> String {
    let mut out = String::from("edge_index,weight\n");
    for (e, x) in w.iter().enumerate() {
        out.push_str(&format!("{e},{x}\n"));
    }
    out
}
