use serde_json::json;

use super::Reduction;
use crate::error::{Error, Result};
use crate::graph::{Dag, PathIncidence};

/// `d`-bit vectors with exactly `m` ones, as monotone lattice paths on a
/// `(d−m+1) × (m+1)` grid. Vertex `(i, j)` has id `i·(m+1) + j`. A vertical
/// step into `(i, j)` sets coordinate `i + j` (1-based) and carries its loss;
/// horizontal steps `(i−1, j) -> (i, j)` carry nothing.
#[derive(Debug, Clone)]
pub struct MSets {
    d: usize,
    m: usize,
    dag: Dag,
    /// 0-based coordinate set by each edge, if vertical.
    coord: Vec<Option<usize>>,
}

impl MSets {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if m == 0 || m > d {
            return Err(Error::param("m", format!("need 1 <= m <= d, got m={m}, d={d}")));
        }
        let id = |i: usize, j: usize| i * (m + 1) + j;
        let mut edges = Vec::new();
        let mut coord = Vec::new();
        for i in 0..=d - m {
            for j in 0..=m {
                if j > 0 {
                    edges.push((id(i, j - 1), id(i, j)));
                    coord.push(Some(i + j - 1));
                }
                if i > 0 {
                    edges.push((id(i - 1, j), id(i, j)));
                    coord.push(None);
                }
            }
        }
        let dag = Dag::new((d - m + 1) * (m + 1), edges, 0, id(d - m, m))?;
        Ok(MSets { d, m, dag, coord })
    }

    /// Vertex id of grid point `(i, j)`.
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        i * (self.m + 1) + j
    }
}

impl Reduction for MSets {
    type Action = Vec<bool>;
    type Loss = Vec<f64>;

    fn dag(&self) -> &Dag {
        &self.dag
    }

    fn encode(&self, x: &Vec<bool>) -> Result<PathIncidence> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        if x.iter().filter(|&&b| b).count() != self.m {
            return Err(Error::param("action", format!("need exactly {} ones", self.m)));
        }
        let (mut i, mut j) = (0, 0);
        let mut vertices = vec![self.vertex(0, 0)];
        for &b in x {
            if b {
                j += 1;
            } else {
                i += 1;
            }
            vertices.push(self.vertex(i, j));
        }
        PathIncidence::from_vertices(&self.dag, &vertices)
    }

    fn decode(&self, p: &PathIncidence) -> Result<Vec<bool>> {
        let p = PathIncidence::from_edges(&self.dag, p.edges.clone())?;
        let mut x = vec![false; self.d];
        for &e in &p.edges {
            if let Some(k) = self.coord[e] {
                x[k] = true;
            }
        }
        Ok(x)
    }

    fn lift_loss(&self, y: &Vec<f64>) -> Vec<f64> {
        self.coord.iter().map(|c| c.map_or(0.0, |k| y[k])).collect()
    }

    fn domain_loss(&self, x: &Vec<bool>, y: &Vec<f64>) -> f64 {
        x.iter().zip(y).filter(|(b, _)| **b).map(|(_, v)| v).sum()
    }

    fn metadata(&self) -> serde_json::Value {
        json!({
            "domain": "mset",
            "d": self.d,
            "m": self.m,
            "edge_coordinate": self.coord.iter().map(|c| c.map(|k| k + 1)).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shaded_path_example() {
        let ms = MSets::new(5, 2).unwrap();
        let v = |i, j| ms.vertex(i, j);
        let p = PathIncidence::from_vertices(
            ms.dag(),
            &[v(0, 0), v(1, 0), v(2, 0), v(2, 1), v(3, 1), v(3, 2)],
        )
        .unwrap();
        assert_eq!(ms.decode(&p).unwrap(), vec![false, false, true, false, true]);
    }

    #[test]
    fn m_equals_d_is_a_single_path() {
        let ms = MSets::new(4, 4).unwrap();
        let paths = ms.dag().enumerate_paths(10).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(ms.decode(&paths[0]).unwrap(), vec![true; 4]);
    }

    #[test]
    fn counts_binomial() {
        let ms = MSets::new(5, 2).unwrap();
        assert_eq!(ms.dag().enumerate_paths(100).unwrap().len(), 10);
    }
}
