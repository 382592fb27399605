use serde_json::json;

use super::Reduction;
use crate::error::{Error, Result};
use crate::ftrl::check_horizon_delta;
use crate::graph::{Dag, PathIncidence};

/// `m` bandit tasks played simultaneously. Spine vertices `0..=m`; arm `j` of
/// task `i` (1-based `i`) is vertex `m + 1 + offset(i) + j` with edges
/// `v_{i-1} -> arm -> v_i`. The loss of an arm sits on its entry edge.
#[derive(Debug, Clone)]
pub struct Multitask {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    dag: Dag,
}

impl Multitask {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::param("dims", "need at least one task"));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::param("dims", format!("every task needs 2 arms, got {d}")));
        }
        let m = dims.len();
        let mut offsets = Vec::with_capacity(m);
        let mut edges = Vec::new();
        let mut off = 0;
        for (i, &d) in dims.iter().enumerate() {
            offsets.push(off);
            for j in 0..d {
                let arm = m + 1 + off + j;
                edges.push((i, arm));
                edges.push((arm, i + 1));
            }
            off += d;
        }
        let dag = Dag::new(m + 1 + off, edges, 0, m)?;
        Ok(Multitask {
            dims: dims.to_vec(),
            offsets,
            dag,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total number of arms `d = Σ dᵢ`.
    pub fn total_arms(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Flat arm index of arm `j` of task `i` (0-based).
    pub fn arm_index(&self, i: usize, j: usize) -> usize {
        self.offsets[i] + j
    }

    /// Entry edge of arm `j` of task `i` (0-based).
    pub fn arm_edge(&self, i: usize, j: usize) -> usize {
        2 * (self.offsets[i] + j)
    }

    /// Per-coordinate exploration over `V ∪ E`: spine vertices get
    /// `√(log₂(d/δ)/T)`, the vertex and both edges of an arm in task `i` get
    /// `√(log₂(d/δ)/(dᵢ T))`.
    pub fn gamma_override(&self, horizon: usize, delta: f64) -> Result<Vec<f64>> {
        check_horizon_delta(horizon, delta)?;
        let d = self.total_arms() as f64;
        let t = horizon as f64;
        let l = (d / delta).log2();
        let m = self.dims.len();
        let mut g = vec![0.0; self.dag.dim()];
        for v in g.iter_mut().take(m + 1) {
            *v = (l / t).sqrt();
        }
        for (i, &di) in self.dims.iter().enumerate() {
            let gi = (l / (di as f64 * t)).sqrt();
            for j in 0..di {
                g[m + 1 + self.offsets[i] + j] = gi;
                let e = self.arm_edge(i, j);
                g[self.dag.edge_coord(e)] = gi;
                g[self.dag.edge_coord(e + 1)] = gi;
            }
        }
        Ok(g)
    }
}

impl Reduction for Multitask {
    /// Chosen arm per task.
    type Action = Vec<usize>;
    /// Loss per flat arm index.
    type Loss = Vec<f64>;

    fn dag(&self) -> &Dag {
        &self.dag
    }

    fn encode(&self, a: &Vec<usize>) -> Result<PathIncidence> {
        if a.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                got: a.len(),
            });
        }
        let mut edges = Vec::with_capacity(2 * a.len());
        for (i, &j) in a.iter().enumerate() {
            if j >= self.dims[i] {
                return Err(Error::param("action", format!("arm {j} out of range in task {i}")));
            }
            let e = self.arm_edge(i, j);
            edges.push(e);
            edges.push(e + 1);
        }
        PathIncidence::from_edges(&self.dag, edges)
    }

    fn decode(&self, p: &PathIncidence) -> Result<Vec<usize>> {
        let p = PathIncidence::from_edges(&self.dag, p.edges.clone())?;
        Ok(p.edges
            .iter()
            .step_by(2)
            .enumerate()
            .map(|(i, &e)| e / 2 - self.offsets[i])
            .collect())
    }

    fn lift_loss(&self, y: &Vec<f64>) -> Vec<f64> {
        let mut w = vec![0.0; self.dag.num_edges()];
        for (k, &v) in y.iter().enumerate().take(self.total_arms()) {
            w[2 * k] = v;
        }
        w
    }

    fn domain_loss(&self, a: &Vec<usize>, y: &Vec<f64>) -> f64 {
        a.iter()
            .enumerate()
            .map(|(i, &j)| y[self.arm_index(i, j)])
            .sum()
    }

    fn metadata(&self) -> serde_json::Value {
        json!({
            "domain": "multitask",
            "dims": self.dims,
            "arm_edge": (0..self.dims.len())
                .map(|i| (0..self.dims[i]).map(|j| self.arm_edge(i, j)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let mt = Multitask::new(&[2, 2]).unwrap();
        assert_eq!(mt.dag().enumerate_paths(10).unwrap().len(), 4);
        assert_eq!(mt.dag().path_length_range().unwrap(), (4, 4));
    }

    #[test]
    fn gamma_scaling() {
        let mt = Multitask::new(&[2, 8]).unwrap();
        let g = mt.gamma_override(10_000, 0.1).unwrap();
        let g1 = g[mt.dag().edge_coord(mt.arm_edge(0, 0))];
        let g2 = g[mt.dag().edge_coord(mt.arm_edge(1, 0))];
        assert!((g1 / g2 - 2.0).abs() < 1e-12);
        let spine = (f64::log2(10.0 / 0.1) / 1e4).sqrt();
        assert!((g[1] - spine).abs() < 1e-15);
    }

    #[test]
    fn rejects_single_arm_task() {
        assert!(Multitask::new(&[2, 1]).is_err());
    }
}
