//! Markovian path sampling from a point of the flow polytope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::graph::{Dag, PathIncidence};

/// Cap on paths for the enumeration-based oracles.
pub const ORACLE_PATH_CAP: usize = 5000;

/// Seeded ChaCha stream. Distinct `stream` values never overlap.
pub fn replica_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn branch<'a>(dag: &'a Dag, x: &'a [f64], v: usize) -> Result<(f64, &'a [usize])> {
    let out = dag.out_edges(v);
    let total: f64 = out.iter().map(|&e| x[dag.edge_coord(e)].max(0.0)).sum();
    if !(total > 0.0) {
        return Err(Error::DeadEnd(v));
    }
    Ok((total, out))
}

/// Walks from the source, leaving each vertex through out-edge `e` with
/// probability `x[e] / Σ_{out} x`.
pub fn sample_path<R: Rng + ?Sized>(dag: &Dag, x: &[f64], rng: &mut R) -> Result<PathIncidence> {
    if x.len() < dag.dim() {
        return Err(Error::DimensionMismatch {
            expected: dag.dim(),
            got: x.len(),
        });
    }
    let mut v = dag.source();
    let mut vertices = vec![v];
    let mut edges = Vec::new();
    while v != dag.sink() {
        let (total, out) = branch(dag, x, v)?;
        let mut u = rng.random::<f64>() * total;
        let mut pick = None;
        for &e in out {
            let w = x[dag.edge_coord(e)].max(0.0);
            if w > 0.0 {
                pick = Some(e);
                if u < w {
                    break;
                }
                u -= w;
            }
        }
        let e = pick.ok_or(Error::DeadEnd(v))?;
        edges.push(e);
        v = dag.edge(e).1;
        vertices.push(v);
    }
    Ok(PathIncidence { vertices, edges })
}

/// Exact law of [`sample_path`]: every path with its probability.
pub fn sampler_law(dag: &Dag, x: &[f64]) -> Result<Vec<(PathIncidence, f64)>> {
    if x.len() < dag.dim() {
        return Err(Error::DimensionMismatch {
            expected: dag.dim(),
            got: x.len(),
        });
    }
    let paths = dag.enumerate_paths(ORACLE_PATH_CAP)?;
    paths
        .into_iter()
        .map(|p| {
            let mut prob = 1.0;
            for (&v, &e) in p.vertices.iter().zip(&p.edges) {
                let (total, _) = branch(dag, x, v)?;
                prob *= x[dag.edge_coord(e)].max(0.0) / total;
            }
            Ok((p, prob))
        })
        .collect()
}

/// Marginals `Σ_p P(p)·incidence(p)` of a path law.
pub fn law_marginals(dag: &Dag, law: &[(PathIncidence, f64)]) -> Vec<f64> {
    let mut m = vec![0.0; dag.dim()];
    for (p, w) in law {
        for &v in &p.vertices {
            m[v] += w;
        }
        for &e in &p.edges {
            m[dag.edge_coord(e)] += w;
        }
    }
    m
}
