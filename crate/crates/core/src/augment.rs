//! Path-length augmentation.
//!
//! Each vertex gets its longest distance `K(v)` from the source. An edge
//! `(u, v)` skips the levels strictly between `K(u)` and `K(v)`; a path's bit
//! `i` is set when one of its edges skips level `i`. Levels no edge can skip
//! are dead and get no coordinate. Live bits are stored after the `V ∪ E`
//! coordinates, in increasing level order.

use std::ops::Range;

use crate::graph::{Dag, PathIncidence};

/// Skipped-level intervals for every edge, plus the live bit levels.
#[derive(Debug, Clone, PartialEq)]
pub struct BitIndexMap {
    k: usize,
    k_labels: Vec<usize>,
    intervals: Vec<Range<usize>>,
    live_levels: Vec<usize>,
    slot_of_level: Vec<Option<usize>>,
    supporting: Vec<Vec<usize>>,
}

/// One linear equality `Σ coeff·x[coord] = rhs` over the augmented vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEquality {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl BitIndexMap {
    /// Longest source-sink path length `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn k_labels(&self) -> &[usize] {
        &self.k_labels
    }

    /// Levels `i` with `K(u) < i < K(v)` for edge `e = (u, v)`.
    pub fn interval(&self, e: usize) -> Range<usize> {
        self.intervals[e].clone()
    }

    /// Live levels, in increasing order. Bit slot `j` stores level `live_levels()[j]`.
    pub fn live_levels(&self) -> &[usize] {
        &self.live_levels
    }

    pub fn num_bits(&self) -> usize {
        self.live_levels.len()
    }

    /// Bit slot of a level, if it is live.
    pub fn slot(&self, level: usize) -> Option<usize> {
        self.slot_of_level.get(level).copied().flatten()
    }

    /// Bit slots touched by edge `e`. Every level in an edge interval is live.
    pub fn edge_slots(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.intervals[e]
            .clone()
            .map(move |l| self.slot_of_level[l].expect("interval levels are live"))
    }

    /// Edges whose interval contains the level of slot `j`.
    pub fn supporting_edges(&self, j: usize) -> &[usize] {
        &self.supporting[j]
    }
}

/// Computes the interval sets from the longest-distance labels of a pruned DAG.
pub fn interval_set(dag: &Dag) -> BitIndexMap {
    interval_set_with(dag, dag.longest_dist())
}

/// As [`interval_set`] with precomputed `K` labels.
pub fn interval_set_with(dag: &Dag, k_labels: Vec<usize>) -> BitIndexMap {
    let k = k_labels[dag.sink()];
    let intervals: Vec<Range<usize>> = dag
        .edges()
        .iter()
        .map(|&(u, v)| k_labels[u] + 1..k_labels[v].max(k_labels[u] + 1))
        .collect();
    let mut support = vec![Vec::new(); k.max(1)];
    for (e, r) in intervals.iter().enumerate() {
        for l in r.clone() {
            support[l].push(e);
        }
    }
    let mut slot_of_level = vec![None; k + 1];
    let mut live_levels = Vec::new();
    let mut supporting = Vec::new();
    for (l, s) in support.into_iter().enumerate().skip(1) {
        if !s.is_empty() {
            slot_of_level[l] = Some(live_levels.len());
            live_levels.push(l);
            supporting.push(s);
        }
    }
    BitIndexMap {
        k,
        k_labels,
        intervals,
        live_levels,
        slot_of_level,
        supporting,
    }
}

/// The live bits `b(x)` of a path, one entry per slot.
pub fn augment_path(x: &PathIncidence, map: &BitIndexMap) -> Vec<u8> {
    let mut b = vec![0u8; map.num_bits()];
    for &e in &x.edges {
        for j in map.edge_slots(e) {
            b[j] = 1;
        }
    }
    b
}

/// Dense augmented incidence `x ∘ b(x)` of a path.
pub fn augmented_incidence(dag: &Dag, map: &BitIndexMap, x: &PathIncidence) -> Vec<f64> {
    let mut v = x.to_dense(dag);
    v.extend(augment_path(x, map).into_iter().map(f64::from));
    v
}

/// Extends a flow point with the bit coordinates it implies.
pub fn augment_point(dag: &Dag, map: &BitIndexMap, base: &[f64]) -> Vec<f64> {
    let mut v = base.to_vec();
    v.extend((0..map.num_bits()).map(|j| {
        map.supporting_edges(j)
            .iter()
            .map(|&e| base[dag.edge_coord(e)])
            .sum::<f64>()
    }));
    v
}

/// One equality per live bit: `x[bit] - Σ_{e supports bit} x[e] = 0`.
pub fn augmented_constraints(dag: &Dag, map: &BitIndexMap) -> Vec<LinearEquality> {
    (0..map.num_bits())
        .map(|j| {
            let mut terms = vec![(dag.dim() + j, 1.0)];
            terms.extend(
                map.supporting_edges(j)
                    .iter()
                    .map(|&e| (dag.edge_coord(e), -1.0)),
            );
            LinearEquality { terms, rhs: 0.0 }
        })
        .collect()
}

/// Largest violation of a set of equalities at `x`.
pub fn constraint_residual(cons: &[LinearEquality], x: &[f64]) -> f64 {
    cons.iter()
        .map(|c| (c.terms.iter().map(|&(i, a)| a * x[i]).sum::<f64>() - c.rhs).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> Dag {
        Dag::new(3, vec![(0, 1), (1, 2), (0, 2)], 0, 2).unwrap()
    }

    #[test]
    fn diamond_intervals() {
        let d = diamond();
        let m = interval_set(&d);
        assert_eq!(m.k(), 2);
        assert_eq!(m.interval(2), 1..2);
        assert!(m.interval(0).is_empty());
        assert!(m.interval(1).is_empty());
        assert_eq!(m.live_levels(), &[1]);
    }

    #[test]
    fn diamond_bits() {
        let d = diamond();
        let m = interval_set(&d);
        let direct = PathIncidence::from_edges(&d, vec![2]).unwrap();
        let long = PathIncidence::from_edges(&d, vec![0, 1]).unwrap();
        assert_eq!(augment_path(&direct, &m), vec![1]);
        assert_eq!(augment_path(&long, &m), vec![0]);
    }

    #[test]
    fn diamond_constraint() {
        let d = diamond();
        let c = augmented_constraints(&d, &interval_set(&d));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].terms, vec![(d.dim(), 1.0), (d.edge_coord(2), -1.0)]);
    }

    #[test]
    fn layered_has_no_bits() {
        let d = Dag::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)], 0, 3).unwrap();
        let m = interval_set(&d);
        assert_eq!(m.num_bits(), 0);
        assert!(augmented_constraints(&d, &m).is_empty());
        for p in d.enumerate_paths(10).unwrap() {
            assert!(augment_path(&p, &m).is_empty());
        }
    }

    #[test]
    fn dead_level_is_dropped() {
        // s -> a -> b -> t and s -> a -> t: level 2 is skipped by (a,t);
        // level 1 is never skipped.
        let d = Dag::new(4, vec![(0, 1), (1, 2), (2, 3), (1, 3)], 0, 3).unwrap();
        let m = interval_set(&d);
        assert_eq!(m.k(), 3);
        assert_eq!(m.live_levels(), &[2]);
        assert_eq!(m.slot(1), None);
        assert_eq!(m.slot(2), Some(0));
    }
}
