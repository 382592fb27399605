//! Directed acyclic graphs with a designated source and sink.
//!
//! Vertices and edges are dense indices. Every vector over `V ∪ E` puts the
//! vertex coordinates first (`0..n`) followed by the edge coordinates
//! (`n..n+m`).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default absolute tolerance for flow-polytope membership checks.
pub const FLOW_TOL: f64 = 1e-8;

/// A validated DAG with a source that has no in-edges and a sink with no out-edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    n: usize,
    edges: Vec<(usize, usize)>,
    source: usize,
    sink: usize,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    topo: Vec<usize>,
    topo_pos: Vec<usize>,
}

/// Index maps produced by [`Dag::prune_with_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct PruneMap {
    /// Old vertex id to new vertex id.
    pub vertex: Vec<Option<usize>>,
    /// Old edge id to new edge id.
    pub edge: Vec<Option<usize>>,
    /// New vertex id to old vertex id.
    pub vertex_back: Vec<usize>,
    /// New edge id to old edge id.
    pub edge_back: Vec<usize>,
}

impl PruneMap {
    /// Maps a path of the pruned graph back to the original graph.
    pub fn path_back(&self, p: &PathIncidence) -> PathIncidence {
        PathIncidence {
            vertices: p.vertices.iter().map(|&v| self.vertex_back[v]).collect(),
            edges: p.edges.iter().map(|&e| self.edge_back[e]).collect(),
        }
    }

    /// Maps a path of the original graph into the pruned graph.
    pub fn path_forward(&self, p: &PathIncidence) -> Result<PathIncidence> {
        let vertices = p
            .vertices
            .iter()
            .map(|&v| self.vertex.get(v).copied().flatten())
            .collect::<Option<Vec<_>>>();
        let edges = p
            .edges
            .iter()
            .map(|&e| self.edge.get(e).copied().flatten())
            .collect::<Option<Vec<_>>>();
        match (vertices, edges) {
            (Some(vertices), Some(edges)) => Ok(PathIncidence { vertices, edges }),
            _ => Err(Error::InvalidPath("path uses pruned elements".into())),
        }
    }

    /// Restricts an edge-indexed vector to the surviving edges.
    pub fn edge_vector<T: Clone>(&self, w: &[T]) -> Vec<T> {
        self.edge_back.iter().map(|&e| w[e].clone()).collect()
    }

    /// Restricts a `V ∪ E` vector of the original graph to the pruned graph.
    pub fn coord_vector<T: Clone>(&self, x: &[T]) -> Vec<T> {
        let n_old = self.vertex.len();
        self.vertex_back
            .iter()
            .map(|&v| x[v].clone())
            .chain(self.edge_back.iter().map(|&e| x[n_old + e].clone()))
            .collect()
    }
}

impl Dag {
    /// Builds a DAG, rejecting cycles, self-loops, parallel edges and a
    /// source/sink with edges on the wrong side.
    pub fn new(n: usize, edges: Vec<(usize, usize)>, source: usize, sink: usize) -> Result<Self> {
        for &v in &[source, sink] {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
        }
        if source == sink {
            return Err(Error::SourceIsSink);
        }
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            for &x in &[u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u, v)) {
                return Err(Error::ParallelEdge { tail: u, head: v });
            }
            out_edges[u].push(i);
            in_edges[v].push(i);
        }
        let topo = kahn(n, &edges, &in_edges, &out_edges)?;
        if !in_edges[source].is_empty() {
            return Err(Error::SourceHasInEdges(source));
        }
        if !out_edges[sink].is_empty() {
            return Err(Error::SinkHasOutEdges(sink));
        }
        let mut topo_pos = vec![0; n];
        for (i, &v) in topo.iter().enumerate() {
            topo_pos[v] = i;
        }
        Ok(Dag {
            n,
            edges,
            source,
            sink,
            out_edges,
            in_edges,
            topo,
            topo_pos,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Length of a `V ∪ E` coordinate vector.
    pub fn dim(&self) -> usize {
        self.n + self.edges.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    /// Coordinate of edge `e` in a `V ∪ E` vector.
    pub fn edge_coord(&self, e: usize) -> usize {
        self.n + e
    }

    /// Edge id of `(tail, head)`, if present.
    pub fn find_edge(&self, tail: usize, head: usize) -> Option<usize> {
        self.out_edges
            .get(tail)?
            .iter()
            .copied()
            .find(|&e| self.edges[e].1 == head)
    }

    /// Topological order; ties are broken by smallest vertex id.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// Position of `v` in [`Dag::topo_order`].
    pub fn topo_position(&self, v: usize) -> usize {
        self.topo_pos[v]
    }

    fn reachable_from_source(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[self.source] = true;
        for &v in &self.topo {
            if seen[v] {
                for &e in &self.out_edges[v] {
                    seen[self.edges[e].1] = true;
                }
            }
        }
        seen
    }

    fn coreachable_to_sink(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[self.sink] = true;
        for &v in self.topo.iter().rev() {
            if self.out_edges[v].iter().any(|&e| seen[self.edges[e].1]) {
                seen[v] = true;
            }
        }
        seen
    }

    /// True when every vertex lies on some source-sink path.
    pub fn is_pruned(&self) -> bool {
        let f = self.reachable_from_source();
        let b = self.coreachable_to_sink();
        (0..self.n).all(|v| f[v] && b[v])
    }

    /// Keeps exactly the vertices and edges lying on a source-sink path.
    pub fn prune(&self) -> Result<Dag> {
        self.prune_with_map().map(|(d, _)| d)
    }

    /// Like [`Dag::prune`], also returning the index maps. Surviving vertices
    /// and edges keep their relative order.
    pub fn prune_with_map(&self) -> Result<(Dag, PruneMap)> {
        let f = self.reachable_from_source();
        let b = self.coreachable_to_sink();
        if !f[self.sink] {
            return Err(Error::NoPath);
        }
        let keep: Vec<bool> = (0..self.n).map(|v| f[v] && b[v]).collect();
        let mut vertex = vec![None; self.n];
        let mut vertex_back = Vec::new();
        for v in 0..self.n {
            if keep[v] {
                vertex[v] = Some(vertex_back.len());
                vertex_back.push(v);
            }
        }
        let mut edge = vec![None; self.edges.len()];
        let mut edge_back = Vec::new();
        let mut new_edges = Vec::new();
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if keep[u] && keep[v] {
                edge[i] = Some(edge_back.len());
                edge_back.push(i);
                new_edges.push((vertex[u].unwrap(), vertex[v].unwrap()));
            }
        }
        let dag = Dag::new(
            vertex_back.len(),
            new_edges,
            vertex[self.source].unwrap(),
            vertex[self.sink].unwrap(),
        )?;
        Ok((
            dag,
            PruneMap {
                vertex,
                edge,
                vertex_back,
                edge_back,
            },
        ))
    }

    /// Number of source-to-`v` paths for every vertex, in exact arithmetic.
    pub fn count_paths(&self) -> Vec<BigUint> {
        let mut c = vec![BigUint::zero(); self.n];
        c[self.source] = BigUint::one();
        for &v in &self.topo {
            for &e in &self.in_edges[v] {
                let u = self.edges[e].0;
                let add = c[u].clone();
                c[v] += add;
            }
        }
        c
    }

    /// Number of source-sink paths.
    pub fn num_paths(&self) -> BigUint {
        self.count_paths().swap_remove(self.sink)
    }

    /// Longest distance (in edges) from the source to every vertex.
    /// Vertices unreachable from the source get 0.
    pub fn longest_dist(&self) -> Vec<usize> {
        let reach = self.reachable_from_source();
        let mut k = vec![0usize; self.n];
        for &v in &self.topo {
            for &e in &self.in_edges[v] {
                let u = self.edges[e].0;
                if reach[u] {
                    k[v] = k[v].max(k[u] + 1);
                }
            }
        }
        k
    }

    /// Minimum and maximum number of edges over source-sink paths.
    pub fn path_length_range(&self) -> Result<(usize, usize)> {
        let (lo, hi) = self.path_weight_range(&vec![1.0; self.edges.len()])?;
        Ok((lo.round() as usize, hi.round() as usize))
    }

    /// Lists every source-sink path, failing if there are more than `cap`.
    pub fn enumerate_paths(&self, cap: usize) -> Result<Vec<PathIncidence>> {
        let total = self.num_paths();
        if total > BigUint::from(cap) {
            return Err(Error::TooManyPaths { cap });
        }
        let coreach = self.coreachable_to_sink();
        let mut out = Vec::with_capacity(total.to_usize().unwrap_or(0));
        let mut vertices = vec![self.source];
        let mut edges = Vec::new();
        // Explicit DFS stack of (vertex, next out-edge slot).
        let mut stack = vec![(self.source, 0usize)];
        while let Some(&(v, slot)) = stack.last() {
            if v == self.sink {
                out.push(PathIncidence {
                    vertices: vertices.clone(),
                    edges: edges.clone(),
                });
                stack.pop();
                vertices.pop();
                edges.pop();
                continue;
            }
            if slot < self.out_edges[v].len() {
                let e = self.out_edges[v][slot];
                stack.last_mut().unwrap().1 += 1;
                let w = self.edges[e].1;
                if coreach[w] {
                    vertices.push(w);
                    edges.push(e);
                    stack.push((w, 0));
                }
            } else {
                stack.pop();
                vertices.pop();
                edges.pop();
            }
        }
        Ok(out)
    }

    /// Checks membership of a `V ∪ E` vector in the flow polytope within `tol`.
    pub fn validate_flow(&self, point: &[f64], tol: f64) -> Result<bool> {
        Ok(self.flow_residual(point)? <= tol
            && point.iter().all(|&x| x >= -tol && x <= 1.0 + tol))
    }

    /// Largest violation of the flow equalities (ignores the box constraints).
    pub fn flow_residual(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        let mut worst = (point[self.source] - 1.0)
            .abs()
            .max((point[self.sink] - 1.0).abs());
        for v in 0..self.n {
            if v != self.source {
                let s: f64 = self.in_edges[v].iter().map(|&e| point[self.n + e]).sum();
                worst = worst.max((point[v] - s).abs());
            }
            if v != self.sink {
                let s: f64 = self.out_edges[v].iter().map(|&e| point[self.n + e]).sum();
                worst = worst.max((point[v] - s).abs());
            }
        }
        Ok(worst)
    }

    /// Extreme path weights `(min, max)` under edge weights `w`.
    pub fn path_weight_range(&self, w: &[f64]) -> Result<(f64, f64)> {
        if w.len() != self.edges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.edges.len(),
                got: w.len(),
            });
        }
        let mut lo = vec![f64::INFINITY; self.n];
        let mut hi = vec![f64::NEG_INFINITY; self.n];
        lo[self.source] = 0.0;
        hi[self.source] = 0.0;
        for &v in &self.topo {
            if !lo[v].is_finite() {
                continue;
            }
            for &e in &self.out_edges[v] {
                let u = self.edges[e].1;
                lo[u] = lo[u].min(lo[v] + w[e]);
                hi[u] = hi[u].max(hi[v] + w[e]);
            }
        }
        if !lo[self.sink].is_finite() {
            return Err(Error::NoPath);
        }
        Ok((lo[self.sink], hi[self.sink]))
    }

    /// Checks that every path weight lies in `[-1, 1]`.
    pub fn check_loss_range(&self, w: &[f64]) -> Result<()> {
        let (min, max) = self.path_weight_range(w)?;
        if min < -1.0 - 1e-12 || max > 1.0 + 1e-12 {
            return Err(Error::RangeViolation { min, max });
        }
        Ok(())
    }

    /// Minimum-weight path under cumulative edge losses, by DP in topological
    /// order. Ties keep the first edge in out-edge order.
    pub fn best_path_in_hindsight(&self, cumulative: &[f64]) -> Result<(PathIncidence, f64)> {
        if cumulative.len() != self.edges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.edges.len(),
                got: cumulative.len(),
            });
        }
        // Cost-to-go towards the sink.
        let mut cost = vec![f64::INFINITY; self.n];
        let mut next = vec![usize::MAX; self.n];
        cost[self.sink] = 0.0;
        for &v in self.topo.iter().rev() {
            for &e in &self.out_edges[v] {
                let c = cumulative[e] + cost[self.edges[e].1];
                if c < cost[v] {
                    cost[v] = c;
                    next[v] = e;
                }
            }
        }
        if !cost[self.source].is_finite() {
            return Err(Error::NoPath);
        }
        let mut v = self.source;
        let mut vertices = vec![v];
        let mut edges = Vec::new();
        while v != self.sink {
            let e = next[v];
            edges.push(e);
            v = self.edges[e].1;
            vertices.push(v);
        }
        let p = PathIncidence { vertices, edges };
        let total = p.weight(cumulative);
        Ok((p, total))
    }
}

fn kahn(
    n: usize,
    edges: &[(usize, usize)],
    in_edges: &[Vec<usize>],
    out_edges: &[Vec<usize>],
) -> Result<Vec<usize>> {
    let mut indeg: Vec<usize> = in_edges.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = heap.pop() {
        order.push(v);
        for &e in &out_edges[v] {
            let w = edges[e].1;
            indeg[w] -= 1;
            if indeg[w] == 0 {
                heap.push(Reverse(w));
            }
        }
    }
    if order.len() != n {
        return Err(Error::CycleDetected);
    }
    Ok(order)
}

/// A source-sink path, stored as its ordered vertices and edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct PathIncidence {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl PathIncidence {
    /// Builds a path from an ordered edge list, checking that it walks from
    /// source to sink.
    pub fn from_edges(dag: &Dag, edges: Vec<usize>) -> Result<Self> {
        let mut v = dag.source();
        let mut vertices = vec![v];
        for &e in &edges {
            if e >= dag.num_edges() {
                return Err(Error::UnknownEdge(e));
            }
            let (a, b) = dag.edge(e);
            if a != v {
                return Err(Error::InvalidPath(format!(
                    "edge {e} starts at {a}, expected {v}"
                )));
            }
            v = b;
            vertices.push(v);
        }
        if v != dag.sink() {
            return Err(Error::InvalidPath(format!("path ends at {v}, not the sink")));
        }
        Ok(PathIncidence { vertices, edges })
    }

    /// Builds a path from its vertex sequence.
    pub fn from_vertices(dag: &Dag, vertices: &[usize]) -> Result<Self> {
        if vertices.first() != Some(&dag.source()) {
            return Err(Error::InvalidPath("path must start at the source".into()));
        }
        let edges = vertices
            .windows(2)
            .map(|w| {
                dag.find_edge(w[0], w[1])
                    .ok_or_else(|| Error::InvalidPath(format!("no edge ({}, {})", w[0], w[1])))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_edges(dag, edges)
    }

    /// Decodes a 0/1 vector over `V ∪ E`, checking every incidence invariant.
    pub fn from_bits(dag: &Dag, bits: &[f64]) -> Result<Self> {
        if bits.len() != dag.dim() {
            return Err(Error::DimensionMismatch {
                expected: dag.dim(),
                got: bits.len(),
            });
        }
        if bits.iter().any(|&b| b != 0.0 && b != 1.0) {
            return Err(Error::InvalidPath("entries must be 0 or 1".into()));
        }
        let mut edges = Vec::new();
        let mut v = dag.source();
        while v != dag.sink() {
            let used: Vec<usize> = dag
                .out_edges(v)
                .iter()
                .copied()
                .filter(|&e| bits[dag.edge_coord(e)] == 1.0)
                .collect();
            if used.len() != 1 {
                return Err(Error::InvalidPath(format!(
                    "vertex {v} has {} chosen out-edges",
                    used.len()
                )));
            }
            edges.push(used[0]);
            v = dag.edge(used[0]).1;
        }
        let p = Self::from_edges(dag, edges)?;
        if p.to_dense(dag) != bits {
            return Err(Error::InvalidPath("stray coordinates set".into()));
        }
        Ok(p)
    }

    /// Dense 0/1 vector over `V ∪ E`.
    pub fn to_dense(&self, dag: &Dag) -> Vec<f64> {
        let mut x = vec![0.0; dag.dim()];
        for &v in &self.vertices {
            x[v] = 1.0;
        }
        for &e in &self.edges {
            x[dag.edge_coord(e)] = 1.0;
        }
        x
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// ‖x‖₁, which is `2k + 1` for a path of `k` edges.
    pub fn l1_norm(&self) -> usize {
        self.vertices.len() + self.edges.len()
    }

    /// Inner product with an edge-weight vector.
    pub fn weight(&self, w: &[f64]) -> f64 {
        self.edges.iter().map(|&e| w[e]).sum()
    }

    /// Inner product with a `V ∪ E` vector.
    pub fn dot(&self, dag: &Dag, y: &[f64]) -> f64 {
        self.vertices.iter().map(|&v| y[v]).sum::<f64>()
            + self.edges.iter().map(|&e| y[dag.edge_coord(e)]).sum::<f64>()
    }
}

/// Checks `2^k <= x` exactly.
pub fn pow2_le(k: usize, x: &BigUint) -> bool {
    (BigUint::one() << k) <= *x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::example_dag;

    #[test]
    fn single_edge_topo() {
        let d = Dag::new(2, vec![(0, 1)], 0, 1).unwrap();
        assert_eq!(d.topo_order(), &[0, 1]);
    }

    #[test]
    fn cycle_is_rejected() {
        let e = Dag::new(3, vec![(0, 1), (1, 2), (2, 1)], 0, 2).unwrap_err();
        assert_eq!(e, Error::CycleDetected);
        // Edge t -> s also forms a cycle.
        let e = Dag::new(2, vec![(0, 1), (1, 0)], 0, 1).unwrap_err();
        assert_eq!(e, Error::CycleDetected);
    }

    #[test]
    fn parallel_edges_rejected() {
        let e = Dag::new(2, vec![(0, 1), (0, 1)], 0, 1).unwrap_err();
        assert_eq!(e, Error::ParallelEdge { tail: 0, head: 1 });
    }

    #[test]
    fn example_topo_has_source_first_and_sink_last() {
        let d = example_dag();
        let t = d.topo_order();
        assert_eq!(t[0], 0);
        assert_eq!(*t.last().unwrap(), 7);
        for &(u, v) in d.edges() {
            assert!(d.topo_position(u) < d.topo_position(v));
        }
    }

    #[test]
    fn prune_drops_isolated_and_dead_ends() {
        let d = Dag::new(3, vec![(0, 2)], 0, 2).unwrap();
        let p = d.prune().unwrap();
        assert_eq!(p.num_vertices(), 2);
        assert_eq!(p.edges(), &[(0, 1)]);

        let d = Dag::new(3, vec![(0, 1), (0, 2)], 0, 2).unwrap();
        let (p, map) = d.prune_with_map().unwrap();
        assert_eq!(p.num_vertices(), 2);
        assert_eq!(p.num_edges(), 1);
        assert_eq!(map.vertex[1], None);
        assert_eq!(map.edge_back, vec![1]);

        let d = Dag::new(3, vec![(0, 1)], 0, 2).unwrap();
        assert_eq!(d.prune().unwrap_err(), Error::NoPath);

        let f = example_dag();
        assert_eq!(f.prune().unwrap(), f);
    }

    #[test]
    fn example_counts() {
        let c = example_dag().count_paths();
        let want = [1u32, 1, 1, 2, 3, 4, 3, 10];
        for (v, &w) in want.iter().enumerate() {
            assert_eq!(c[v], BigUint::from(w), "vertex {v}");
        }
    }

    #[test]
    fn longest_dist_diamond() {
        let d = Dag::new(3, vec![(0, 1), (1, 2), (0, 2)], 0, 2).unwrap();
        assert_eq!(d.longest_dist(), vec![0, 1, 2]);
        let single = Dag::new(2, vec![(0, 1)], 0, 1).unwrap();
        assert_eq!(single.longest_dist()[1], 1);
    }

    #[test]
    fn enumerate_example_and_cap() {
        let f = example_dag();
        assert_eq!(f.enumerate_paths(100).unwrap().len(), 10);
        assert_eq!(
            f.enumerate_paths(5).unwrap_err(),
            Error::TooManyPaths { cap: 5 }
        );
    }

    #[test]
    fn validate_flow_cases() {
        let f = example_dag();
        let paths = f.enumerate_paths(100).unwrap();
        let mut mix = vec![0.0; f.dim()];
        for p in &paths {
            assert!(f.validate_flow(&p.to_dense(&f), FLOW_TOL).unwrap());
            for (a, b) in mix.iter_mut().zip(p.to_dense(&f)) {
                *a += b / paths.len() as f64;
            }
        }
        assert!(f.validate_flow(&mix, FLOW_TOL).unwrap());
        mix[0] = 0.5;
        assert!(!f.validate_flow(&mix, FLOW_TOL).unwrap());
        assert!(f.validate_flow(&[1.0], FLOW_TOL).is_err());
    }

    #[test]
    fn hindsight_parallel_routes() {
        let d = Dag::new(2, vec![(0, 1)], 0, 1).unwrap();
        let (_, w) = d.best_path_in_hindsight(&[0.0]).unwrap();
        assert_eq!(w, 0.0);
        let d = Dag::new(4, vec![(0, 1), (1, 3), (0, 2), (2, 3)], 0, 3).unwrap();
        let (p, w) = d.best_path_in_hindsight(&[1.0, 2.0, -1.0, 0.0]).unwrap();
        assert_eq!(p.edges, vec![2, 3]);
        assert_eq!(w, -1.0);
    }

    #[test]
    fn from_bits_roundtrip() {
        let f = example_dag();
        for p in f.enumerate_paths(100).unwrap() {
            let q = PathIncidence::from_bits(&f, &p.to_dense(&f)).unwrap();
            assert_eq!(p, q);
            assert_eq!(p.l1_norm(), 2 * p.len() + 1);
        }
    }
}
