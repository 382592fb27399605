//! Sparse Cholesky factorization for the normal equations `A D Aᵀ` of the
//! constrained Newton step. The sparsity pattern is fixed per domain, so the
//! ordering and fill pattern are computed once and only values change.

use std::collections::BTreeSet;

/// Position of an entry of the symmetric matrix inside the factor storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Diag(usize),
    Off(usize),
}

#[derive(Debug, Clone)]
pub struct SparseCholesky {
    p: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    /// `inv[old] = new`.
    inv: Vec<usize>,
    col_rows: Vec<Vec<usize>>,
    col_start: Vec<usize>,
    /// For each row `j`, the columns `k < j` with `L[j, k]` structurally nonzero
    /// and the flat index of that entry.
    row_lists: Vec<Vec<(usize, usize)>>,
    values: Vec<f64>,
    diag: Vec<f64>,
    work: Vec<f64>,
}

impl SparseCholesky {
    /// Symbolic analysis of a `p × p` symmetric pattern given as off-diagonal
    /// index pairs, using a greedy minimum-degree ordering.
    pub fn analyze(p: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); p];
        for (i, j) in pairs {
            if i != j {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
        let mut eliminated = vec![false; p];
        let mut perm = Vec::with_capacity(p);
        let mut patterns_old: Vec<Vec<usize>> = Vec::with_capacity(p);
        for _ in 0..p {
            let v = (0..p)
                .filter(|&v| !eliminated[v])
                .min_by_key(|&v| (adj[v].len(), v))
                .unwrap();
            let nbrs: Vec<usize> = adj[v].iter().copied().collect();
            for (a, &x) in nbrs.iter().enumerate() {
                adj[x].remove(&v);
                for &y in &nbrs[a + 1..] {
                    adj[x].insert(y);
                    adj[y].insert(x);
                }
            }
            adj[v].clear();
            eliminated[v] = true;
            perm.push(v);
            patterns_old.push(nbrs);
        }
        let mut inv = vec![0; p];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut col_rows = Vec::with_capacity(p);
        let mut col_start = Vec::with_capacity(p + 1);
        let mut total = 0;
        for pat in &patterns_old {
            let mut rows: Vec<usize> = pat.iter().map(|&o| inv[o]).collect();
            rows.sort_unstable();
            col_start.push(total);
            total += rows.len();
            col_rows.push(rows);
        }
        col_start.push(total);
        let mut row_lists = vec![Vec::new(); p];
        for (k, rows) in col_rows.iter().enumerate() {
            for (i, &r) in rows.iter().enumerate() {
                row_lists[r].push((k, col_start[k] + i));
            }
        }
        SparseCholesky {
            p,
            perm,
            inv,
            col_rows,
            col_start,
            row_lists,
            values: vec![0.0; total],
            diag: vec![0.0; p],
            work: vec![0.0; p],
        }
    }

    /// Storage slot of entry `(i, j)` of the original matrix.
    pub fn slot(&self, i: usize, j: usize) -> Slot {
        let (a, b) = (self.inv[i], self.inv[j]);
        if a == b {
            return Slot::Diag(a);
        }
        let (r, c) = if a > b { (a, b) } else { (b, a) };
        let pos = self.col_rows[c]
            .binary_search(&r)
            .expect("entry is in the symbolic pattern");
        Slot::Off(self.col_start[c] + pos)
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
        self.diag.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn add(&mut self, slot: Slot, v: f64) {
        match slot {
            Slot::Diag(i) => self.diag[i] += v,
            Slot::Off(f) => self.values[f] += v,
        }
    }

    /// Factors the assembled matrix in place. Returns false on a
    /// non-positive pivot.
    pub fn factor(&mut self) -> bool {
        let scale = self.diag.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for j in 0..self.p {
            let (s, e) = (self.col_start[j], self.col_start[j + 1]);
            let mut d = self.diag[j];
            for (i, &r) in self.col_rows[j].iter().enumerate() {
                self.work[r] = self.values[s + i];
            }
            for idx in 0..self.row_lists[j].len() {
                let (k, f) = self.row_lists[j][idx];
                let ljk = self.values[f];
                d -= ljk * ljk;
                let ke = self.col_start[k + 1];
                let ks = self.col_start[k];
                for ff in f + 1..ke {
                    let r = self.col_rows[k][ff - ks];
                    self.work[r] -= self.values[ff] * ljk;
                }
            }
            if !(d > scale * 1e-300) || !d.is_finite() {
                return false;
            }
            let dj = d.sqrt();
            self.diag[j] = dj;
            for i in 0..e - s {
                let r = self.col_rows[j][i];
                self.values[s + i] = self.work[r] / dj;
                self.work[r] = 0.0;
            }
        }
        true
    }

    /// Solves `M x = b` with the current factor, in original indexing.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for j in 0..self.p {
            z[j] /= self.diag[j];
            let zj = z[j];
            let s = self.col_start[j];
            for (i, &r) in self.col_rows[j].iter().enumerate() {
                z[r] -= self.values[s + i] * zj;
            }
        }
        for j in (0..self.p).rev() {
            let s = self.col_start[j];
            let mut acc = z[j];
            for (i, &r) in self.col_rows[j].iter().enumerate() {
                acc -= self.values[s + i] * z[r];
            }
            z[j] = acc / self.diag[j];
        }
        let mut x = vec![0.0; self.p];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = z[new];
        }
        x
    }
}
