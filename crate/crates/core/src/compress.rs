//! Graph compression through a max-count spanning tree and its centroid
//! decomposition.
//!
//! Every original vertex `v` becomes a triple `v♭ = 3v`, `v = 3v + 1`,
//! `v♯ = 3v + 2`. Paths of the compressed graph use one tree "express" pair
//! `(a♭, c), (c, b♯)` per maximal tree segment `a..b`, joined by the
//! non-tree edges `(u♯, v♭)`.

use std::ops::AddAssign;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::{Dag, PathIncidence};

/// Max-count spanning arborescence rooted at the source.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    /// Chosen incoming edge `h(v)`; `None` for the source.
    pub parent_edge: Vec<Option<usize>>,
    /// Tail of `h(v)`.
    pub parent: Vec<Option<usize>>,
    pub is_tree_edge: Vec<bool>,
}

impl SpanningTree {
    pub fn tree_edges(&self) -> Vec<usize> {
        (0..self.is_tree_edge.len())
            .filter(|&e| self.is_tree_edge[e])
            .collect()
    }

    pub fn non_tree_edges(&self) -> Vec<usize> {
        (0..self.is_tree_edge.len())
            .filter(|&e| !self.is_tree_edge[e])
            .collect()
    }
}

/// Picks, for each non-source vertex, the in-edge whose tail has the most
/// source paths. Ties go to the tail latest in topological order.
pub fn build_spanning_tree(dag: &Dag, counts: &[BigUint]) -> SpanningTree {
    let n = dag.num_vertices();
    let mut parent_edge = vec![None; n];
    let mut parent = vec![None; n];
    let mut is_tree_edge = vec![false; dag.num_edges()];
    for v in 0..n {
        let best = dag.in_edges(v).iter().copied().max_by(|&a, &b| {
            let (ua, ub) = (dag.edge(a).0, dag.edge(b).0);
            counts[ua]
                .cmp(&counts[ub])
                .then(dag.topo_position(ua).cmp(&dag.topo_position(ub)))
        });
        if let Some(e) = best {
            parent_edge[v] = Some(e);
            parent[v] = Some(dag.edge(e).0);
            is_tree_edge[e] = true;
        }
    }
    SpanningTree {
        parent_edge,
        parent,
        is_tree_edge,
    }
}

/// Recursive centroid decomposition of a tree given by parent pointers.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidDecomposition {
    /// `subtree[c]`: vertex set `V_c` of the component `c` is centroid of, sorted.
    pub subtree: Vec<Vec<usize>>,
    /// Recursion depth at which each vertex was chosen.
    pub depth: Vec<usize>,
    /// Centroid whose removal produced the component of `c`.
    pub parent: Vec<Option<usize>>,
    pub root: usize,
}

/// Decomposes the undirected tree underlying `parent`. Among valid centroids
/// of a component the smallest vertex id is chosen.
pub fn centroid_decompose(parent: &[Option<usize>]) -> CentroidDecomposition {
    let n = parent.len();
    let mut adj = vec![Vec::new(); n];
    for (v, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            adj[v].push(p);
            adj[p].push(v);
        }
    }
    let mut removed = vec![false; n];
    let mut subtree = vec![Vec::new(); n];
    let mut depth = vec![0; n];
    let mut cparent = vec![None; n];
    let mut root = None;
    // Work list of (any vertex of component, depth, parent centroid).
    let mut work = vec![(0usize, 0usize, None)];
    let mut size = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    let mut par = vec![usize::MAX; n];
    while let Some((start, d, pc)) = work.pop() {
        // Collect the component in DFS preorder.
        order.clear();
        par[start] = usize::MAX;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &w in &adj[v] {
                if !removed[w] && w != par[v] {
                    par[w] = v;
                    stack.push(w);
                }
            }
        }
        for &v in order.iter().rev() {
            size[v] = 1 + adj[v]
                .iter()
                .filter(|&&w| !removed[w] && w != par[v])
                .map(|&w| size[w])
                .sum::<usize>();
        }
        let total = order.len();
        let c = order
            .iter()
            .copied()
            .filter(|&v| {
                let up = total - size[v];
                let down = adj[v]
                    .iter()
                    .filter(|&&w| !removed[w] && w != par[v])
                    .map(|&w| size[w])
                    .max()
                    .unwrap_or(0);
                2 * up.max(down) <= total
            })
            .min()
            .expect("every tree has a centroid");
        let mut comp = order.clone();
        comp.sort_unstable();
        subtree[c] = comp;
        depth[c] = d;
        cparent[c] = pc;
        if root.is_none() {
            root = Some(c);
        }
        removed[c] = true;
        for &w in &adj[c] {
            if !removed[w] {
                work.push((w, d + 1, Some(c)));
            }
        }
    }
    CentroidDecomposition {
        subtree,
        depth,
        parent: cparent,
        root: root.unwrap_or(0),
    }
}

/// Role of a compressed edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    IntoCentroid,
    OutOfCentroid,
    NonTree,
}

/// The compressed graph with its edge-to-subpath map `σ`.
#[derive(Debug, Clone)]
pub struct CompressedDag {
    pub gdag: Dag,
    pub sigma: Vec<Vec<usize>>,
    pub kind: Vec<EdgeKind>,
    pub original: Dag,
    pub tree: SpanningTree,
    pub decomp: CentroidDecomposition,
}

pub fn flat(v: usize) -> usize {
    3 * v
}

pub fn mid(v: usize) -> usize {
    3 * v + 1
}

pub fn sharp(v: usize) -> usize {
    3 * v + 2
}

/// Builds the compressed graph of a pruned DAG.
pub fn compress(dag: &Dag) -> Result<CompressedDag> {
    if !dag.is_pruned() {
        return Err(Error::param("dag", "compression needs a pruned graph"));
    }
    let counts = dag.count_paths();
    let tree = build_spanning_tree(dag, &counts);
    let decomp = centroid_decompose(&tree.parent);
    build_gdagger(dag, tree, decomp)
}

/// Assembles `G†` from a spanning tree and its centroid decomposition.
pub fn build_gdagger(
    dag: &Dag,
    tree: SpanningTree,
    decomp: CentroidDecomposition,
) -> Result<CompressedDag> {
    let n = dag.num_vertices();
    let mut children = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = tree.parent[v] {
            children[p].push(v);
        }
    }
    let mut entries: Vec<((usize, usize), Vec<usize>, EdgeKind)> = Vec::new();
    let mut inside = vec![false; n];
    for c in 0..n {
        for &v in &decomp.subtree[c] {
            inside[v] = true;
        }
        // Ancestors of c inside V_c, nearest first.
        let mut path_up = Vec::new();
        entries.push(((flat(c), mid(c)), Vec::new(), EdgeKind::IntoCentroid));
        let mut v = c;
        while let Some(p) = tree.parent[v].filter(|&p| inside[p]) {
            path_up.push(tree.parent_edge[v].unwrap());
            let mut sigma = path_up.clone();
            sigma.reverse();
            entries.push(((flat(p), mid(c)), sigma, EdgeKind::IntoCentroid));
            v = p;
        }
        // Descendants of c inside V_c, with the tree path from c.
        let mut stack = vec![(c, Vec::new())];
        while let Some((v, sigma)) = stack.pop() {
            for &w in children[v].iter().filter(|&&w| inside[w]) {
                let mut s: Vec<usize> = sigma.clone();
                s.push(tree.parent_edge[w].unwrap());
                stack.push((w, s));
            }
            entries.push(((mid(c), sharp(v)), sigma, EdgeKind::OutOfCentroid));
        }
        for &v in &decomp.subtree[c] {
            inside[v] = false;
        }
    }
    for e in tree.non_tree_edges() {
        let (u, v) = dag.edge(e);
        entries.push(((sharp(u), flat(v)), vec![e], EdgeKind::NonTree));
    }
    entries.sort_by_key(|x| x.0);
    let edges = entries.iter().map(|x| x.0).collect();
    let gdag = Dag::new(3 * n, edges, flat(dag.source()), sharp(dag.sink()))?;
    let (sigma, kind) = entries.into_iter().map(|(_, s, k)| (s, k)).unzip();
    Ok(CompressedDag {
        gdag,
        sigma,
        kind,
        original: dag.clone(),
        tree,
        decomp,
    })
}

impl CompressedDag {
    /// Original edges abbreviated by compressed edge `e`, in path order.
    pub fn sigma(&self, e: usize) -> Result<&[usize]> {
        self.sigma
            .get(e)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownEdge(e))
    }

    /// Maps a compressed path to the original path it abbreviates.
    pub fn project_path(&self, p: &PathIncidence) -> Result<PathIncidence> {
        let p = PathIncidence::from_edges(&self.gdag, p.edges.clone())?;
        let edges = p
            .edges
            .iter()
            .flat_map(|&e| self.sigma[e].iter().copied())
            .collect();
        PathIncidence::from_edges(&self.original, edges)
    }

    /// Maps an original path to its compressed path.
    pub fn lift_path(&self, p: &PathIncidence) -> Result<PathIncidence> {
        let p = PathIncidence::from_edges(&self.original, p.edges.clone())?;
        let g = &self.gdag;
        let edge = |a: usize, b: usize| {
            g.find_edge(a, b)
                .ok_or_else(|| Error::InvalidPath(format!("missing compressed edge ({a}, {b})")))
        };
        let mut out = Vec::new();
        let mut seg_start = 0;
        let emit_segment = |lo: usize, hi: usize, out: &mut Vec<usize>| -> Result<()> {
            // The unique centroid on the tree path is the shallowest one.
            let c = p.vertices[lo..=hi]
                .iter()
                .copied()
                .min_by_key(|&v| self.decomp.depth[v])
                .unwrap();
            out.push(edge(flat(p.vertices[lo]), mid(c))?);
            out.push(edge(mid(c), sharp(p.vertices[hi]))?);
            Ok(())
        };
        for (i, &e) in p.edges.iter().enumerate() {
            if !self.tree.is_tree_edge[e] {
                emit_segment(seg_start, i, &mut out)?;
                let (u, v) = self.original.edge(e);
                out.push(edge(sharp(u), flat(v))?);
                seg_start = i + 1;
            }
        }
        emit_segment(seg_start, p.vertices.len() - 1, &mut out)?;
        PathIncidence::from_edges(g, out)
    }

    /// `w†(e†) = Σ_{e ∈ σ(e†)} w(e)`, zero for empty `σ`.
    pub fn convert_weights<T: Clone + Zero + AddAssign>(&self, w: &[T]) -> Vec<T> {
        self.sigma
            .iter()
            .map(|s| {
                let mut acc = T::zero();
                for &e in s {
                    acc += w[e].clone();
                }
                acc
            })
            .collect()
    }
}
