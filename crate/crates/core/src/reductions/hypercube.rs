use serde_json::json;

use super::Reduction;
use crate::error::{Error, Result};
use crate::graph::{Dag, PathIncidence};

/// Binary vectors `{0,1}^d`. Step `i` either goes straight `v_{i-1} -> v_i`
/// (bit 0) or detours through `v_i†` (bit 1); the detour's first edge carries
/// `y[i]`. Vertices `0..=d` are the `v_i`, `d + i` is `v_i†`.
#[derive(Debug, Clone)]
pub struct Hypercube {
    d: usize,
    dag: Dag,
}

impl Hypercube {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "dimension must be at least 1"));
        }
        let mut edges = Vec::with_capacity(3 * d);
        for i in 1..=d {
            edges.push((i - 1, i));
            edges.push((i - 1, d + i));
            edges.push((d + i, i));
        }
        Ok(Hypercube {
            d,
            dag: Dag::new(2 * d + 1, edges, 0, d)?,
        })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }
}

impl Reduction for Hypercube {
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
        let edges = x
            .iter()
            .enumerate()
            .flat_map(|(i, &b)| if b { vec![3 * i + 1, 3 * i + 2] } else { vec![3 * i] })
            .collect();
        PathIncidence::from_edges(&self.dag, edges)
    }

    fn decode(&self, p: &PathIncidence) -> Result<Vec<bool>> {
        let p = PathIncidence::from_edges(&self.dag, p.edges.clone())?;
        let mut x = vec![false; self.d];
        for &e in &p.edges {
            if e % 3 == 1 {
                x[e / 3] = true;
            }
        }
        Ok(x)
    }

    fn lift_loss(&self, y: &Vec<f64>) -> Vec<f64> {
        let mut w = vec![0.0; self.dag.num_edges()];
        for (i, &v) in y.iter().enumerate().take(self.d) {
            w[3 * i + 1] = v;
        }
        w
    }

    fn domain_loss(&self, x: &Vec<bool>, y: &Vec<f64>) -> f64 {
        x.iter().zip(y).filter(|(b, _)| **b).map(|(_, v)| v).sum()
    }

    fn metadata(&self) -> serde_json::Value {
        json!({
            "domain": "hypercube",
            "d": self.d,
            "bit_edge": (0..self.d).map(|i| 3 * i + 1).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_lengths() {
        let h = Hypercube::new(3).unwrap();
        assert_eq!(h.dag().num_vertices(), 7);
        assert_eq!(h.dag().num_edges(), 9);
        assert_eq!(h.dag().path_length_range().unwrap(), (3, 6));
    }

    #[test]
    fn d1_has_two_paths() {
        let h = Hypercube::new(1).unwrap();
        let paths = h.dag().enumerate_paths(10).unwrap();
        let mut decoded: Vec<_> = paths.iter().map(|p| h.decode(p).unwrap()).collect();
        decoded.sort();
        assert_eq!(decoded, vec![vec![false], vec![true]]);
    }

    #[test]
    fn unit_loss_hits_only_detour() {
        let h = Hypercube::new(3).unwrap();
        let w = h.lift_loss(&vec![0.0, 1.0, 0.0]);
        for p in h.dag().enumerate_paths(10).unwrap() {
            let x = h.decode(&p).unwrap();
            assert_eq!(p.weight(&w), if x[1] { 1.0 } else { 0.0 });
        }
    }
}
