use serde_json::json;

use super::Reduction;
use crate::error::{Error, Result};
use crate::graph::{Dag, PathIncidence, PruneMap};

/// Walks of at most `K` steps from `s` to `t` in a directed graph that may
/// contain cycles. Layer copies `(v, i)` get id `i·n + v`; every base edge is
/// repeated between consecutive layers, and `(t, t)` padding edges let short
/// walks idle at the sink. Unreachable layered vertices are pruned.
///
/// An action is the padded vertex sequence of length `K + 1`.
#[derive(Debug, Clone)]
pub struct ShortestWalk {
    n: usize,
    base_edges: Vec<(usize, usize)>,
    k: usize,
    dag: Dag,
    map: PruneMap,
    /// Base edge behind each pruned edge; `None` for padding.
    base_of: Vec<Option<usize>>,
}

impl ShortestWalk {
    pub fn new(n: usize, base_edges: Vec<(usize, usize)>, s: usize, t: usize, k: usize) -> Result<Self> {
        if k == 0 || k > base_edges.len() {
            return Err(Error::param("k", format!("need 1 <= K <= |E| = {}", base_edges.len())));
        }
        if s == t {
            return Err(Error::SourceIsSink);
        }
        for &(u, v) in &base_edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
        }
        if s >= n || t >= n {
            return Err(Error::VertexOutOfRange { vertex: s.max(t), n });
        }
        let mut edges = Vec::with_capacity(k * (base_edges.len() + 1));
        let mut layered_base = Vec::with_capacity(edges.capacity());
        for i in 1..=k {
            for (e, &(u, v)) in base_edges.iter().enumerate() {
                edges.push(((i - 1) * n + u, i * n + v));
                layered_base.push(Some(e));
            }
            edges.push(((i - 1) * n + t, i * n + t));
            layered_base.push(None);
        }
        let full = Dag::new((k + 1) * n, edges, s, k * n + t)?;
        let (dag, map) = full.prune_with_map().map_err(|e| match e {
            Error::NoPath => Error::NoWalk(k),
            other => other,
        })?;
        let base_of = map.edge_back.iter().map(|&e| layered_base[e]).collect();
        Ok(ShortestWalk {
            n,
            base_edges,
            k,
            dag,
            map,
            base_of,
        })
    }

    pub fn horizon_steps(&self) -> usize {
        self.k
    }

    fn base_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.base_edges.iter().position(|&e| e == (u, v))
    }
}

impl Reduction for ShortestWalk {
    /// Vertex sequence `s = v_0, ..., v_K = t`, padded with `t`.
    type Action = Vec<usize>;
    /// Weight per base edge.
    type Loss = Vec<f64>;

    fn dag(&self) -> &Dag {
        &self.dag
    }

    fn encode(&self, walk: &Vec<usize>) -> Result<PathIncidence> {
        if walk.len() != self.k + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.k + 1,
                got: walk.len(),
            });
        }
        let vertices = walk
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v >= self.n {
                    return None;
                }
                self.map.vertex[i * self.n + v]
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidPath("walk leaves the reachable layers".into()))?;
        PathIncidence::from_vertices(&self.dag, &vertices)
    }

    fn decode(&self, p: &PathIncidence) -> Result<Vec<usize>> {
        let p = PathIncidence::from_edges(&self.dag, p.edges.clone())?;
        Ok(p.vertices
            .iter()
            .map(|&v| self.map.vertex_back[v] % self.n)
            .collect())
    }

    fn lift_loss(&self, w: &Vec<f64>) -> Vec<f64> {
        self.base_of.iter().map(|b| b.map_or(0.0, |e| w[e])).collect()
    }

    fn domain_loss(&self, walk: &Vec<usize>, w: &Vec<f64>) -> f64 {
        walk.windows(2)
            .filter(|p| p[0] != p[1])
            .map(|p| self.base_edge(p[0], p[1]).map_or(f64::NAN, |e| w[e]))
            .sum()
    }

    fn metadata(&self) -> serde_json::Value {
        json!({
            "domain": "walk",
            "n": self.n,
            "k": self.k,
            "base_edges": self.base_edges,
            "edge_base": self.base_of,
            "layer_vertex": self.map.vertex_back.iter()
                .map(|&v| (v / self.n, v % self.n))
                .collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acyclic_two_edges() {
        let w = ShortestWalk::new(3, vec![(0, 1), (1, 2)], 0, 2, 2).unwrap();
        let paths = w.dag().enumerate_paths(10).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(w.decode(&paths[0]).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn cycle_is_representable() {
        // s = 0, a = 1, t = 2
        let w = ShortestWalk::new(3, vec![(0, 1), (1, 0), (0, 2)], 0, 2, 3).unwrap();
        let p = w.encode(&vec![0, 1, 0, 2]).unwrap();
        assert_eq!(w.decode(&p).unwrap(), vec![0, 1, 0, 2]);
        let (lo, hi) = w.dag().path_length_range().unwrap();
        assert_eq!((lo, hi), (3, 3));
        let mut all: Vec<_> = w
            .dag()
            .enumerate_paths(100)
            .unwrap()
            .iter()
            .map(|p| w.decode(p).unwrap())
            .collect();
        all.sort();
        assert_eq!(all, vec![vec![0, 1, 0, 2], vec![0, 2, 2, 2]]);
    }

    #[test]
    fn padding_carries_no_weight() {
        let w = ShortestWalk::new(2, vec![(0, 1)], 0, 1, 1).unwrap();
        assert!(w.base_of.iter().all(|b| b.is_some()));
        let w = ShortestWalk::new(3, vec![(0, 1), (1, 0), (0, 2)], 0, 2, 3).unwrap();
        let lifted = w.lift_loss(&vec![0.3, -0.2, 0.5]);
        for (e, b) in w.base_of.iter().enumerate() {
            if b.is_none() {
                assert_eq!(lifted[e], 0.0);
            }
        }
    }

    #[test]
    fn unreachable_sink_is_no_walk() {
        let err = ShortestWalk::new(4, vec![(0, 1), (1, 2), (2, 3)], 0, 3, 2).unwrap_err();
        assert_eq!(err, Error::NoWalk(2));
    }
}
