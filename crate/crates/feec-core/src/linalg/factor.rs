//! Direct sparse solvers: reverse Cuthill–McKee ordering followed by either an envelope
//! Cholesky factorization (SPD systems) or a banded LU with partial pivoting (symmetric
//! indefinite or general systems). A Jacobi-preconditioned conjugate gradient is kept as a
//! fallback for SPD systems.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods exist only when std is linked
use num_traits::Float;

use super::sparse::{axpy, dot, norm2, SparseMatrix};
use crate::error::{shape, Error, Result};

/// Reverse Cuthill–McKee ordering of the symmetrized sparsity pattern; `perm[new] = old`.
pub fn rcm_ordering(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.sort_by_key(|&i| (degree[i], i));
    for &seed in &nodes {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        visited[start] = true;
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut depth = 0;
    let mut reached = Vec::new();
    while let Some(v) = queue.pop_front() {
        reached.push(v);
        depth = depth.max(level[v]);
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let last: Vec<usize> = reached.into_iter().filter(|&v| level[v] == depth).collect();
    (last, depth)
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut current = seed;
    let (mut frontier, mut depth) = bfs_levels(current, adj);
    for _ in 0..8 {
        let Some(&candidate) = frontier.iter().min_by_key(|&&v| (degree[v], v)) else { break };
        let (next_frontier, next_depth) = bfs_levels(candidate, adj);
        if next_depth <= depth {
            break;
        }
        current = candidate;
        frontier = next_frontier;
        depth = next_depth;
    }
    current
}

/// Largest `|i - j|` over the stored entries.
pub fn bandwidth(a: &SparseMatrix) -> usize {
    a.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
}

/// Envelope (skyline) Cholesky factor `A = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl EnvelopeCholesky {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(shape("Cholesky needs a square matrix"));
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
            first[hi] = first[hi].min(lo);
        }
        let mut rows: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; i - first[i] + 1]).collect();
        for (i, j, v) in a.triplets() {
            if j <= i {
                rows[i][j - first[i]] = v;
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = rows[i][j - fi];
                if k0 < j {
                    let (ri, rj) = if j < i {
                        let (head, tail) = rows.split_at(i);
                        (&tail[0][k0 - fi..j - fi], &head[j][k0 - fj..j - fj])
                    } else {
                        (&rows[i][k0 - fi..j - fi], &rows[i][k0 - fi..j - fi])
                    };
                    s -= dot(ri, rj);
                }
                if j < i {
                    rows[i][j - fi] = s / rows[j][j - fj];
                } else {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Factorization("matrix is not positive definite".into()));
                    }
                    rows[i][i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self { first, rows })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let r = &self.rows[i];
            let s = y[i] - dot(&r[..i - fi], &y[fi..i]);
            y[i] = s / r[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let r = &self.rows[i];
            y[i] /= r[i - fi];
            let xi = y[i];
            for (k, &l) in (fi..i).zip(r.iter()) {
                y[k] -= l * xi;
            }
        }
        y
    }
}

/// Banded LU factorization with partial pivoting (LAPACK `gbtf2` layout).
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    pivot_ratio: f64,
}

impl BandLu {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(shape("LU needs a square matrix"));
        }
        let mut kl = 0;
        let mut ku = 0;
        for (i, j, _) in a.triplets() {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let ldab = 2 * kl + ku + 1;
        let kv = kl + ku;
        let mut ab = vec![0.0; ldab * n];
        for (i, j, v) in a.triplets() {
            ab[kv + i - j + j * ldab] = v;
        }
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        let mut pmax: f64 = 0.0;
        let mut pmin = f64::INFINITY;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab;
            let mut jp = 0;
            let mut best = -1.0;
            for t in 0..=km {
                let v = ab[col + kv + t].abs();
                if v > best {
                    best = v;
                    jp = t;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(Error::Factorization("matrix is singular".into()));
            }
            pmax = pmax.max(best);
            pmin = pmin.min(best);
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let r1 = kv + j - c + c * ldab;
                    let r2 = kv + j + jp - c + c * ldab;
                    ab.swap(r1, r2);
                }
            }
            let piv = ab[col + kv];
            for t in 1..=km {
                ab[col + kv + t] /= piv;
            }
            for c in j + 1..=ju {
                let ucj = ab[kv + j - c + c * ldab];
                if ucj == 0.0 {
                    continue;
                }
                for t in 1..=km {
                    let l = ab[col + kv + t];
                    ab[kv + j + t - c + c * ldab] -= l * ucj;
                }
            }
        }
        Ok(Self { n, kl, ku, ab, ipiv, pivot_ratio: if pmax > 0.0 { pmin / pmax } else { 0.0 } })
    }

    /// Ratio between the smallest and the largest pivot magnitude, a cheap singularity indicator.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let ldab = 2 * self.kl + self.ku + 1;
        let kv = self.kl + self.ku;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(p, j);
            }
            let km = self.kl.min(n - 1 - j);
            let xj = x[j];
            if xj != 0.0 {
                for t in 1..=km {
                    x[j + t] -= self.ab[j * ldab + kv + t] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.ab[j * ldab + kv];
            let xj = x[j];
            if xj != 0.0 {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    x[i] -= self.ab[kv + i - j + j * ldab] * xj;
                }
            }
        }
        x
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Cholesky(EnvelopeCholesky),
    Lu(BandLu),
}

/// A reordered direct factorization of a sparse matrix, with residual-driven refinement.
#[derive(Debug, Clone)]
pub struct SparseFactorization {
    perm: Vec<usize>,
    matrix: SparseMatrix,
    kernel: Kernel,
}

impl SparseFactorization {
    /// Factorization for symmetric positive definite matrices. Fails if a non-positive pivot
    /// appears.
    pub fn cholesky(a: &SparseMatrix) -> Result<Self> {
        let perm = rcm_ordering(a);
        let kernel = Kernel::Cholesky(EnvelopeCholesky::new(&a.permute_symmetric(&perm))?);
        Ok(Self { perm, matrix: a.clone(), kernel })
    }

    /// Pivoted factorization for symmetric indefinite (or general) matrices.
    pub fn lu(a: &SparseMatrix) -> Result<Self> {
        let perm = rcm_ordering(a);
        let kernel = Kernel::Lu(BandLu::new(&a.permute_symmetric(&perm))?);
        Ok(Self { perm, matrix: a.clone(), kernel })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Smallest-to-largest pivot ratio for the LU kernel; `None` for Cholesky.
    pub fn pivot_ratio(&self) -> Option<f64> {
        match &self.kernel {
            Kernel::Cholesky(_) => None,
            Kernel::Lu(lu) => Some(lu.pivot_ratio()),
        }
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let pb: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        let px = match &self.kernel {
            Kernel::Cholesky(c) => c.solve(&pb),
            Kernel::Lu(lu) => lu.solve(&pb),
        };
        let mut x = vec![0.0; b.len()];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = px[new];
        }
        x
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(shape("right-hand side length does not match the factorization"));
        }
        let mut x = self.raw_solve(b);
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok(x);
        }
        for _ in 0..3 {
            let ax = self.matrix.mul_vec(&x)?;
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            if norm2(&r) <= 1e-14 * bnorm {
                break;
            }
            let dx = self.raw_solve(&r);
            axpy(1.0, &dx, &mut x);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite solution from direct solver".into()));
        }
        Ok(x)
    }
}

/// Direct solve of an SPD system.
pub fn solve_spd(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    SparseFactorization::cholesky(a)?.solve(b)
}

/// Direct solve of a general (typically symmetric indefinite) system.
pub fn solve_general(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    SparseFactorization::lu(a)?.solve(b)
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone)]
pub struct IterativeSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for SPD systems.
pub fn conjugate_gradient(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<IterativeSolution> {
    let n = a.nrows();
    if b.len() != n || a.ncols() != n {
        return Err(shape("CG dimension mismatch"));
    }
    let inv_diag: Vec<f64> = a
        .diag()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(IterativeSolution { x, iterations: 0, relative_residual: 0.0 });
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Numerical("CG encountered a non-positive curvature direction".into()));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let res = norm2(&r) / bnorm;
        if res <= tol {
            return Ok(IterativeSolution { x, iterations: it, relative_residual: res });
        }
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::Numerical("CG did not converge within the iteration budget".into()))
}
