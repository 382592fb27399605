//! Fixed example graphs and random instance generators.

use rand::Rng;

use crate::graph::Dag;

/// Labels of the vertices of [`example_dag`], by index.
pub const EXAMPLE_LABELS: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

/// The eight-vertex example graph with source `A` and sink `H` used
/// throughout the compression examples. It has ten source-sink paths.
pub fn example_dag() -> Dag {
    let e = |a: char, b: char| (a as usize - 'A' as usize, b as usize - 'A' as usize);
    let edges = vec![
        e('A', 'B'),
        e('A', 'C'),
        e('A', 'D'),
        e('B', 'E'),
        e('B', 'F'),
        e('C', 'D'),
        e('C', 'G'),
        e('D', 'E'),
        e('D', 'G'),
        e('E', 'F'),
        e('E', 'H'),
        e('F', 'H'),
        e('G', 'H'),
    ];
    Dag::new(8, edges, 0, 7).expect("fixed example graph is valid")
}

/// `k` parallel two-edge routes `s -> r_i -> t`. Vertex 0 is the source,
/// vertex `k + 1` the sink.
pub fn parallel_routes(k: usize) -> Dag {
    let t = k + 1;
    let mut edges = Vec::with_capacity(2 * k);
    for i in 1..=k {
        edges.push((0, i));
        edges.push((i, t));
    }
    Dag::new(k + 2, edges, 0, t).expect("parallel routes are valid")
}

/// Random DAG on `n` vertices with source `0` and sink `n - 1`: each forward
/// pair `i < j` is an edge with probability `p`, plus a guaranteed
/// backbone path. The result is pruned.
pub fn random_dag<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> Dag {
    assert!(n >= 2);
    let mut edges = Vec::new();
    // Backbone through a random subset keeps the sink reachable.
    let mut prev = 0;
    for v in 1..n - 1 {
        if rng.random_bool(0.5) {
            edges.push((prev, v));
            prev = v;
        }
    }
    edges.push((prev, n - 1));
    for i in 0..n - 1 {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Dag::new(n, edges, 0, n - 1)
        .and_then(|d| d.prune())
        .expect("forward edges form a DAG with a path")
}

/// Strictly positive point of the flow polytope obtained by pushing unit flow
/// from the source with random split ratios bounded below by `floor`.
pub fn random_flow<R: Rng + ?Sized>(rng: &mut R, dag: &Dag, floor: f64) -> Vec<f64> {
    let mut x = vec![0.0; dag.dim()];
    x[dag.source()] = 1.0;
    for &v in dag.topo_order() {
        let out = dag.out_edges(v);
        if out.is_empty() {
            continue;
        }
        let w: Vec<f64> = out.iter().map(|_| floor + rng.random::<f64>()).collect();
        let total: f64 = w.iter().sum();
        for (&e, wi) in out.iter().zip(w) {
            let f = x[v] * wi / total;
            x[dag.edge_coord(e)] = f;
            x[dag.edge(e).1] += f;
        }
    }
    x
}

/// Random directed tree on `n` vertices rooted at 0, as parent pointers.
/// `shape` in `[0, 1]` skews towards paths (1) or stars (0).
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize, shape: f64) -> Vec<Option<usize>> {
    let mut parent = vec![None; n];
    for v in 1..n {
        parent[v] = Some(if rng.random_bool(shape) {
            v - 1
        } else {
            rng.random_range(0..v)
        });
    }
    parent
}
