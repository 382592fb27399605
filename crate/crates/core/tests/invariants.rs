//! Property tests over random DAGs.

use dagbandit::augment::interval_set;
use dagbandit::compress::compress;
use dagbandit::estimators::exact_estimator_expectation;
use dagbandit::ftrl::{FtrlDomain, Solver};
use dagbandit::generators::{random_dag, random_flow};
use dagbandit::reductions::{Hypercube, MSets, Multitask, Reduction};
use dagbandit::sampler::{law_marginals, replica_rng, sampler_law};
use dagbandit::{Dag, PathIncidence};
use proptest::prelude::*;
use rand::Rng;

const PATH_CAP: usize = 2000;

fn graph(seed: u64, n: usize, p: f64) -> Dag {
    random_dag(&mut replica_rng(seed, 0), n, p)
}

/// Edge losses scaled so every path weight lies in [-0.99, 0.99].
fn losses(dag: &Dag, seed: u64) -> Vec<f64> {
    let mut rng = replica_rng(seed, 1);
    let mut y: Vec<f64> = (0..dag.num_edges()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (lo, hi) = dag.path_weight_range(&y).unwrap();
    let worst = lo.abs().max(hi.abs());
    if worst > 0.99 {
        y.iter_mut().for_each(|v| *v *= 0.99 / worst);
    }
    y
}

fn graphs() -> impl Strategy<Value = Dag> {
    (any::<u64>(), 2usize..11, 0.2f64..0.9).prop_map(|(s, n, p)| graph(s, n, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_output_is_a_positive_flow(dag in graphs(), seed in any::<u64>(), eta in 0.05f64..2.0, bits in any::<bool>()) {
        let map = bits.then(|| interval_set(&dag));
        let domain = FtrlDomain::new(dag.clone(), map).unwrap();
        let mut rng = replica_rng(seed, 2);
        let cumulative: Vec<f64> = (0..domain.dim()).map(|_| rng.random_range(-10.0..10.0)).collect();
        let start = domain.interior_point();
        let out = Solver::new(&domain).solve(&domain, &cumulative, eta, 1e-9, &start).unwrap();
        prop_assert!(out.x.iter().all(|&v| v > 0.0));
        prop_assert!(domain.residual(&out.x) < 1e-8, "residual {}", domain.residual(&out.x));
        prop_assert!(dag.flow_residual(&out.x[..dag.dim()]).unwrap() < 1e-8);
    }

    #[test]
    fn sampler_law_reproduces_the_flow(dag in graphs(), seed in any::<u64>(), floor in 0.01f64..1.0) {
        prop_assume!(dag.num_paths() <= PATH_CAP.into());
        let x = random_flow(&mut replica_rng(seed, 3), &dag, floor);
        prop_assert!(dag.flow_residual(&x).unwrap() < 1e-12);
        let law = sampler_law(&dag, &x).unwrap();
        let total: f64 = law.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let m = law_marginals(&dag, &law);
        for (a, b) in m.iter().zip(&x) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn compression_round_trips_paths_and_weights(dag in graphs(), seed in any::<u64>()) {
        prop_assume!(dag.num_paths() <= PATH_CAP.into());
        let c = compress(&dag).unwrap();
        let w = losses(&dag, seed);
        let lifted_w = c.convert_weights(&w);
        let paths = dag.enumerate_paths(PATH_CAP).unwrap();
        let mut lifted: Vec<Vec<usize>> = Vec::new();
        for p in &paths {
            let q = c.lift_path(p).unwrap();
            prop_assert_eq!(&c.project_path(&q).unwrap(), p);
            prop_assert!((q.weight(&lifted_w) - p.weight(&w)).abs() < 1e-12);
            lifted.push(q.edges);
        }
        lifted.sort();
        lifted.dedup();
        prop_assert_eq!(lifted.len(), paths.len());
    }

    #[test]
    fn estimator_expectation_identity(dag in graphs(), seed in any::<u64>(), aug in any::<bool>()) {
        prop_assume!(dag.num_paths() <= 200u32.into());
        let xt = random_flow(&mut replica_rng(seed, 4), &dag, 0.05);
        let y = losses(&dag, seed);
        let bits = interval_set(&dag);
        let kmax = dag.longest_dist()[dag.sink()] as f64;
        for x in dag.enumerate_paths(PATH_CAP).unwrap() {
            let got = exact_estimator_expectation(&dag, aug.then_some(&bits), &xt, &y, &x).unwrap();
            let want = if aug {
                x.weight(&y) + 2.0 * kmax - 1.0
            } else {
                x.weight(&y) + x.l1_norm() as f64 - 2.0
            };
            prop_assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn hypercube_bijection(d in 1usize..7, seed in any::<u64>()) {
        let r = Hypercube::new(d).unwrap();
        let y: Vec<f64> = {
            let mut rng = replica_rng(seed, 5);
            (0..d).map(|_| rng.random_range(-1.0..1.0) / d as f64).collect()
        };
        check_bijection(&r, &y, 1usize << d)?;
    }

    #[test]
    fn mset_bijection(d in 1usize..8, m_frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let m = 1 + (m_frac * (d - 1) as f64).round() as usize;
        let r = MSets::new(d, m).unwrap();
        let y: Vec<f64> = {
            let mut rng = replica_rng(seed, 6);
            (0..d).map(|_| rng.random_range(-1.0..1.0) / d as f64).collect()
        };
        let count: usize = (0..m).fold(1, |acc, i| acc * (d - i) / (i + 1));
        check_bijection(&r, &y, count)?;
    }

    #[test]
    fn multitask_bijection(dims in proptest::collection::vec(2usize..5, 1..4), seed in any::<u64>()) {
        let r = Multitask::new(&dims).unwrap();
        let total: usize = dims.iter().sum();
        let y: Vec<f64> = {
            let mut rng = replica_rng(seed, 7);
            (0..total).map(|_| rng.random_range(-1.0..1.0) / dims.len() as f64).collect()
        };
        check_bijection(&r, &y, dims.iter().product())?;
    }
}

/// Every path decodes to an action that encodes back to it, decoded actions
/// are distinct, and lifted losses match the domain loss.
fn check_bijection<R: Reduction<Loss = Vec<f64>>>(r: &R, y: &Vec<f64>, count: usize) -> Result<(), TestCaseError> {
    let paths = r.dag().enumerate_paths(PATH_CAP).unwrap();
    prop_assert_eq!(paths.len(), count);
    let w = r.lift_loss(y);
    let mut actions = Vec::new();
    for p in &paths {
        let a = r.decode(p).unwrap();
        let back: PathIncidence = r.encode(&a).unwrap();
        prop_assert_eq!(&back, p);
        prop_assert!((p.weight(&w) - r.domain_loss(&a, y)).abs() < 1e-12);
        prop_assert!(!actions.contains(&a));
        actions.push(a);
    }
    Ok(())
}
