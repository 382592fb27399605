use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Reduction;
use crate::error::{Error, Result};
use crate::graph::{Dag, PathIncidence};

/// Per-round Blotto loss: `y[i][a][b]` is the loss on battlefield `i` when we
/// send `a` soldiers and the opponent sends `b`; `b_alloc` is the opponent's
/// allocation for this round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlottoLoss {
    pub y: Vec<Vec<Vec<f64>>>,
    pub b_alloc: Vec<usize>,
}

/// Allocations of `N` soldiers over `K` battlefields. Vertex `v_i^j` means
/// `j` soldiers have been placed on the first `i` fields; the source is
/// `v_0^0`, the sink `v_K^N`, and the edge `v_{i-1}^{j0} -> v_i^{j1}` places
/// `j1 − j0` soldiers on field `i`.
#[derive(Debug, Clone)]
pub struct Blotto {
    n: usize,
    k: usize,
    dag: Dag,
    /// `(field, j0, j1)` for every edge.
    edge_info: Vec<(usize, usize, usize)>,
}

impl Blotto {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", "need at least one battlefield"));
        }
        let sink = Self::vertex_id(n, k, k, n);
        let mut edges = Vec::new();
        let mut edge_info = Vec::new();
        for i in 1..=k {
            let tails: Vec<usize> = if i == 1 { vec![0] } else { (0..=n).collect() };
            for &j0 in &tails {
                let heads: Vec<usize> = if i == k { vec![n] } else { (j0..=n).collect() };
                for j1 in heads {
                    edges.push((Self::vertex_id(n, k, i - 1, j0), Self::vertex_id(n, k, i, j1)));
                    edge_info.push((i - 1, j0, j1));
                }
            }
        }
        let dag = Dag::new(sink + 1, edges, 0, sink)?;
        Ok(Blotto { n, k, dag, edge_info })
    }

    /// Vertex id of `v_i^j`: source 0, then `N + 1` ids per inner layer, then
    /// the sink.
    fn vertex_id(n: usize, k: usize, i: usize, j: usize) -> usize {
        if i == 0 {
            0
        } else if i == k {
            1 + (k - 1) * (n + 1)
        } else {
            1 + (i - 1) * (n + 1) + j
        }
    }

    pub fn vertex(&self, i: usize, j: usize) -> usize {
        Self::vertex_id(self.n, self.k, i, j)
    }

    pub fn soldiers(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> usize {
        self.k
    }

    fn check_loss(&self, loss: &BlottoLoss) -> bool {
        loss.y.len() == self.k
            && loss.b_alloc.len() == self.k
            && loss
                .y
                .iter()
                .all(|m| m.len() == self.n + 1 && m.iter().all(|r| r.len() == self.n + 1))
    }
}

impl Reduction for Blotto {
    type Action = Vec<usize>;
    type Loss = BlottoLoss;

    fn dag(&self) -> &Dag {
        &self.dag
    }

    fn encode(&self, a: &Vec<usize>) -> Result<PathIncidence> {
        if a.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: a.len(),
            });
        }
        if a.iter().sum::<usize>() != self.n {
            return Err(Error::param("action", format!("allocation must sum to {}", self.n)));
        }
        let mut j = 0;
        let mut vertices = vec![self.vertex(0, 0)];
        for (i, &ai) in a.iter().enumerate() {
            j += ai;
            vertices.push(self.vertex(i + 1, j));
        }
        PathIncidence::from_vertices(&self.dag, &vertices)
    }

    fn decode(&self, p: &PathIncidence) -> Result<Vec<usize>> {
        let p = PathIncidence::from_edges(&self.dag, p.edges.clone())?;
        Ok(p.edges
            .iter()
            .map(|&e| {
                let (_, j0, j1) = self.edge_info[e];
                j1 - j0
            })
            .collect())
    }

    fn lift_loss(&self, loss: &BlottoLoss) -> Vec<f64> {
        assert!(self.check_loss(loss), "Blotto loss has the wrong shape");
        self.edge_info
            .iter()
            .map(|&(i, j0, j1)| loss.y[i][j1 - j0][loss.b_alloc[i]])
            .collect()
    }

    fn domain_loss(&self, a: &Vec<usize>, loss: &BlottoLoss) -> f64 {
        a.iter()
            .enumerate()
            .map(|(i, &ai)| loss.y[i][ai][loss.b_alloc[i]])
            .sum()
    }

    fn metadata(&self) -> serde_json::Value {
        json!({
            "domain": "blotto",
            "soldiers": self.n,
            "fields": self.k,
            "edge_field_j0_j1": self.edge_info,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_allocation() {
        let b = Blotto::new(4, 3).unwrap();
        let p = PathIncidence::from_vertices(
            b.dag(),
            &[b.vertex(0, 0), b.vertex(1, 0), b.vertex(2, 1), b.vertex(3, 4)],
        )
        .unwrap();
        assert_eq!(b.decode(&p).unwrap(), vec![0, 1, 3]);
        assert_eq!(b.encode(&vec![0, 1, 3]).unwrap(), p);
    }

    #[test]
    fn compositions() {
        let b = Blotto::new(4, 3).unwrap();
        assert_eq!(b.dag().enumerate_paths(100).unwrap().len(), 15);
        assert_eq!(b.dag().path_length_range().unwrap(), (3, 3));
    }

    #[test]
    fn no_soldiers() {
        let b = Blotto::new(0, 3).unwrap();
        let paths = b.dag().enumerate_paths(10).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(b.decode(&paths[0]).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn single_field() {
        let b = Blotto::new(3, 1).unwrap();
        assert_eq!(b.dag().num_edges(), 1);
    }
}
