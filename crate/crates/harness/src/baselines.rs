//! Reference learners sharing the [`Policy`] protocol.

use dagbandit::reductions::{Multitask, Reduction};
use dagbandit::sampler::replica_rng;
use dagbandit::{Dag, Error, PathIncidence, Policy, Result};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

/// Draws an index from unnormalized non-negative weights.
fn draw<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let total: f64 = p.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &x) in p.iter().enumerate() {
        if u < x {
            return i;
        }
        u -= x;
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// Exponential weights from cumulative estimated losses, shifted for
/// numerical stability.
fn softmin(cum: &[f64], eta: f64) -> Vec<f64> {
    let lo = cum.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = cum.iter().map(|c| (-eta * (c - lo)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn check_protocol(pending: bool, round: usize, horizon: usize) -> Result<()> {
    if pending {
        return Err(Error::ProtocolViolation("choose called twice without feed"));
    }
    if round >= horizon {
        return Err(Error::ProtocolViolation("horizon exhausted"));
    }
    Ok(())
}

/// Independent EXP3-IX per task of a multi-task problem. Every task sees the
/// shared scalar loss, mapped to `[0, 1]` by `(ℓ + 1) / 2`.
pub struct Exp3IxMultitask {
    mt: Multitask,
    horizon: usize,
    eta: Vec<f64>,
    gamma: Vec<f64>,
    cum: Vec<Vec<f64>>,
    rng: ChaCha20Rng,
    pending: Option<(Vec<usize>, Vec<f64>)>,
    round: usize,
}

impl Exp3IxMultitask {
    pub fn new(dims: &[usize], horizon: usize, seed: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: "must be positive".into(),
            });
        }
        let mt = Multitask::new(dims)?;
        let t = horizon as f64;
        let eta: Vec<f64> = dims
            .iter()
            .map(|&d| (2.0 * (d as f64).ln() / (d as f64 * t)).sqrt())
            .collect();
        let gamma = eta.iter().map(|e| e / 2.0).collect();
        Ok(Exp3IxMultitask {
            cum: dims.iter().map(|&d| vec![0.0; d]).collect(),
            mt,
            horizon,
            eta,
            gamma,
            rng: replica_rng(seed, 0),
            pending: None,
            round: 0,
        })
    }

    pub fn dag(&self) -> &Dag {
        self.mt.dag()
    }

    /// Current sampling law of task `i`.
    pub fn task_distribution(&self, i: usize) -> Vec<f64> {
        softmin(&self.cum[i], self.eta[i])
    }
}

impl Policy for Exp3IxMultitask {
    fn choose(&mut self) -> Result<PathIncidence> {
        check_protocol(self.pending.is_some(), self.round, self.horizon)?;
        let mut arms = Vec::with_capacity(self.cum.len());
        let mut probs = Vec::with_capacity(self.cum.len());
        for i in 0..self.cum.len() {
            let p = self.task_distribution(i);
            let a = draw(&p, &mut self.rng);
            probs.push(p[a]);
            arms.push(a);
        }
        let path = self.mt.encode(&arms)?;
        self.pending = Some((arms, probs));
        Ok(path)
    }

    fn feed(&mut self, loss: f64) -> Result<()> {
        if !(loss.abs() <= 1.0) {
            return Err(Error::OutOfRangeLoss(loss));
        }
        let (arms, probs) = self
            .pending
            .take()
            .ok_or(Error::ProtocolViolation("feed called without choose"))?;
        let l = (loss + 1.0) / 2.0;
        for (i, (&a, &p)) in arms.iter().zip(&probs).enumerate() {
            self.cum[i][a] += l / (p + self.gamma[i]);
        }
        self.round += 1;
        Ok(())
    }
}

/// EXP3 with uniform mixing over an explicit path list. Losses are mapped to
/// `[0, 1]` and importance weighted. Mixing `γ = min(1/2, √(N ln N / T))`,
/// learning rate `γ / N`.
pub struct Exp3Paths {
    paths: Vec<PathIncidence>,
    horizon: usize,
    gamma: f64,
    eta: f64,
    cum: Vec<f64>,
    rng: ChaCha20Rng,
    pending: Option<(usize, f64)>,
    round: usize,
}

impl Exp3Paths {
    pub fn new(dag: &Dag, horizon: usize, cap: usize, seed: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: "must be positive".into(),
            });
        }
        // Enumerate on the pruned graph, report on the input graph.
        let (pruned, map) = dag.prune_with_map()?;
        let paths: Vec<_> = pruned
            .enumerate_paths(cap)?
            .iter()
            .map(|p| map.path_back(p))
            .collect();
        let n = paths.len() as f64;
        let gamma = if paths.len() > 1 {
            (n * n.ln() / horizon as f64).sqrt().min(0.5)
        } else {
            0.5
        };
        Ok(Exp3Paths {
            cum: vec![0.0; paths.len()],
            eta: gamma / n,
            paths,
            horizon,
            gamma,
            rng: replica_rng(seed, 0),
            pending: None,
            round: 0,
        })
    }

    pub fn paths(&self) -> &[PathIncidence] {
        &self.paths
    }

    pub fn distribution(&self) -> Vec<f64> {
        let n = self.paths.len() as f64;
        softmin(&self.cum, self.eta)
            .into_iter()
            .map(|q| (1.0 - self.gamma) * q + self.gamma / n)
            .collect()
    }
}

impl Policy for Exp3Paths {
    fn choose(&mut self) -> Result<PathIncidence> {
        check_protocol(self.pending.is_some(), self.round, self.horizon)?;
        let p = self.distribution();
        let i = draw(&p, &mut self.rng);
        self.pending = Some((i, p[i]));
        Ok(self.paths[i].clone())
    }

    fn feed(&mut self, loss: f64) -> Result<()> {
        if !(loss.abs() <= 1.0) {
            return Err(Error::OutOfRangeLoss(loss));
        }
        let (i, p) = self
            .pending
            .take()
            .ok_or(Error::ProtocolViolation("feed called without choose"))?;
        self.cum[i] += (loss + 1.0) / 2.0 / p;
        self.round += 1;
        Ok(())
    }
}

/// Plays a uniformly random path every round.
pub struct UniformPaths {
    paths: Vec<PathIncidence>,
    rng: ChaCha20Rng,
    pending: bool,
}

impl UniformPaths {
    pub fn new(dag: &Dag, cap: usize, seed: u64) -> Result<Self> {
        let (pruned, map) = dag.prune_with_map()?;
        let paths = pruned
            .enumerate_paths(cap)?
            .iter()
            .map(|p| map.path_back(p))
            .collect();
        Ok(UniformPaths {
            paths,
            rng: replica_rng(seed, 0),
            pending: false,
        })
    }
}

impl Policy for UniformPaths {
    fn choose(&mut self) -> Result<PathIncidence> {
        if self.pending {
            return Err(Error::ProtocolViolation("choose called twice without feed"));
        }
        self.pending = true;
        let i = self.rng.random_range(0..self.paths.len());
        Ok(self.paths[i].clone())
    }

    fn feed(&mut self, loss: f64) -> Result<()> {
        if !(loss.abs() <= 1.0) {
            return Err(Error::OutOfRangeLoss(loss));
        }
        if !std::mem::take(&mut self.pending) {
            return Err(Error::ProtocolViolation("feed called without choose"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dagbandit::generators::{example_dag, parallel_routes};

    #[test]
    fn exp3_ix_zero_losses_keep_uniform() {
        let mut b = Exp3IxMultitask::new(&[3, 2], 100, 0).unwrap();
        for _ in 0..50 {
            b.choose().unwrap();
            b.feed(-1.0).unwrap();
        }
        assert_eq!(b.task_distribution(0), vec![1.0 / 3.0; 3]);
        assert_eq!(b.task_distribution(1), vec![0.5; 2]);
    }

    #[test]
    fn exp3_ix_tasks_are_independent() {
        let mut b = Exp3IxMultitask::new(&[2, 2], 100, 0).unwrap();
        b.choose().unwrap();
        b.feed(1.0).unwrap();
        assert_eq!(b.cum[0].iter().filter(|&&x| x > 0.0).count(), 1);
        assert_eq!(b.cum[1].iter().filter(|&&x| x > 0.0).count(), 1);
    }

    #[test]
    fn exp3_paths_starts_uniform_and_fits_example() {
        let b = Exp3Paths::new(&example_dag(), 1000, 100, 0).unwrap();
        assert_eq!(b.paths().len(), 10);
        assert!(b.distribution().iter().all(|&p| (p - 0.1).abs() < 1e-15));
        assert!(matches!(
            Exp3Paths::new(&example_dag(), 1000, 5, 0),
            Err(Error::TooManyPaths { .. })
        ));
    }

    #[test]
    fn protocol_violations() {
        let mut b = Exp3Paths::new(&parallel_routes(2), 1, 10, 0).unwrap();
        assert!(b.feed(0.0).is_err());
        b.choose().unwrap();
        assert!(b.choose().is_err());
        b.feed(0.0).unwrap();
        assert!(b.choose().is_err());
    }
}
