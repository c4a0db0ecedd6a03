//! Generalized symmetric eigenproblems `A v = λ B v` near a shift, by shift-invert Lanczos
//! with full reorthogonalization and locking of converged pairs across restarts.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods exist only when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{generalized_symmetric_eigen, tridiagonal_eigen};
use super::factor::SparseFactorization;
use super::sparse::{axpy, dot, norm2, SparseMatrix};
use crate::error::{shape, Error, Result};

/// Eigenpairs sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// `B`-orthonormal eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖A v − λ B v‖ / ‖v‖` for each pair.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// Shift-invert Lanczos; falls back to the dense solver for small failing problems.
    Lanczos,
    /// Dense reduction, intended for small problems and cross-checks.
    Dense,
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub k: usize,
    pub sigma: f64,
    /// Eigenvalues at or below this value are treated as kernel modes and never returned.
    pub exclude_below: Option<f64>,
    pub seed: u64,
    /// Convergence threshold on the relative Ritz residual of the shifted-inverted operator.
    pub tol: f64,
    pub max_basis: usize,
    pub method: EigenMethod,
}

impl EigenOptions {
    pub fn new(k: usize, sigma: f64) -> Self {
        Self { k, sigma, exclude_below: None, seed: 7, tol: 1e-11, max_basis: 300, method: EigenMethod::Lanczos }
    }
}

/// The `k` eigenpairs of `A v = λ B v` closest to `sigma`.
pub fn generalized_eigs(a: &SparseMatrix, b: &SparseMatrix, k: usize, sigma: f64) -> Result<EigenResult> {
    generalized_eigs_with(a, b, &EigenOptions::new(k, sigma))
}

pub fn generalized_eigs_with(a: &SparseMatrix, b: &SparseMatrix, opts: &EigenOptions) -> Result<EigenResult> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(shape("eigenproblem matrices must be square and of equal size"));
    }
    if opts.k == 0 || opts.k > n {
        return Err(Error::Parameter("eigenpair count must be in 1..=n".into()));
    }
    match opts.method {
        EigenMethod::Dense => dense_eigs(a, b, opts),
        EigenMethod::Lanczos => match lanczos_eigs(a, b, opts) {
            Err(Error::Numerical(_)) if n <= 600 => {
                log::warn!("Lanczos did not converge, using the dense eigensolver");
                dense_eigs(a, b, opts)
            }
            other => other,
        },
    }
}

fn keep(lambda: f64, opts: &EigenOptions) -> bool {
    opts.exclude_below.map_or(true, |t| lambda > t)
}

fn finish(a: &SparseMatrix, b: &SparseMatrix, mut pairs: Vec<(f64, Vec<f64>)>, opts: &EigenOptions) -> Result<EigenResult> {
    pairs.sort_by(|x, y| (x.0 - opts.sigma).abs().total_cmp(&(y.0 - opts.sigma).abs()));
    pairs.truncate(opts.k);
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = EigenResult { eigenvalues: Vec::new(), eigenvectors: Vec::new(), residuals: Vec::new() };
    for (lambda, v) in pairs {
        let av = a.mul_vec(&v)?;
        let bv = b.mul_vec(&v)?;
        let r: Vec<f64> = av.iter().zip(&bv).map(|(x, y)| x - lambda * y).collect();
        out.residuals.push(norm2(&r) / norm2(&v));
        out.eigenvalues.push(lambda);
        out.eigenvectors.push(v);
    }
    Ok(out)
}

fn dense_eigs(a: &SparseMatrix, b: &SparseMatrix, opts: &EigenOptions) -> Result<EigenResult> {
    let (vals, vecs) = generalized_symmetric_eigen(&a.to_dense(), &b.to_dense())?;
    let pairs: Vec<(f64, Vec<f64>)> = vals
        .iter()
        .enumerate()
        .filter(|(_, &l)| keep(l, opts))
        .map(|(j, &l)| (l, vecs.column(j)))
        .collect();
    if pairs.len() < opts.k {
        return Err(Error::Numerical("fewer admissible eigenvalues than requested".into()));
    }
    finish(a, b, pairs, opts)
}

struct Locked {
    vecs: Vec<Vec<f64>>,
    bvecs: Vec<Vec<f64>>,
    thetas: Vec<f64>,
}

impl Locked {
    fn orthogonalize(&self, w: &mut [f64]) {
        for (y, by) in self.vecs.iter().zip(&self.bvecs) {
            let c = dot(by, w);
            axpy(-c, y, w);
        }
    }
}

fn lanczos_eigs(a: &SparseMatrix, b: &SparseMatrix, opts: &EigenOptions) -> Result<EigenResult> {
    let n = a.nrows();
    let sigma = opts.sigma;
    let shifted = a.add(1.0, b, -sigma)?;
    let fact = SparseFactorization::lu(&shifted).map_err(|_| Error::Shift(sigma))?;
    if fact.pivot_ratio().unwrap_or(1.0) < 1e-14 {
        return Err(Error::Shift(sigma));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked = Locked { vecs: Vec::new(), bvecs: Vec::new(), thetas: Vec::new() };
    let lambda_of = |theta: f64| sigma + 1.0 / theta;

    for _pass in 0..(4 * opts.k + 20) {
        let room = n - locked.vecs.len();
        if room == 0 {
            break;
        }
        // Magnitude |θ| of the k-th best admissible locked pair; new pairs must beat it.
        let mut good: Vec<f64> = locked
            .thetas
            .iter()
            .filter(|&&t| keep(lambda_of(t), opts))
            .map(|t| t.abs())
            .collect();
        good.sort_by(|x, y| y.total_cmp(x));
        let threshold = if good.len() >= opts.k { good[opts.k - 1] } else { 0.0 };
        let need = opts.k.saturating_sub(good.len()).max(1);

        let found = lanczos_pass(&fact, b, &locked, opts, need, room.min(opts.max_basis), &mut rng)?;
        let mut improved = false;
        for (theta, x) in found {
            if theta.abs() > threshold * (1.0 + 1e-9) && keep(lambda_of(theta), opts) {
                improved = true;
            }
            let bx = b.mul_vec(&x)?;
            locked.vecs.push(x);
            locked.bvecs.push(bx);
            locked.thetas.push(theta);
        }
        if good.len() >= opts.k && !improved {
            break;
        }
    }
    let pairs: Vec<(f64, Vec<f64>)> = locked
        .vecs
        .iter()
        .zip(&locked.thetas)
        .map(|(v, &t)| (v, lambda_of(t)))
        .filter(|(_, l)| keep(*l, opts))
        .map(|(v, _)| {
            let av = a.mul_vec(v)?;
            let bv = b.mul_vec(v)?;
            Ok((dot(v, &av) / dot(v, &bv), v.clone()))
        })
        .collect::<Result<_>>()?;
    if pairs.len() < opts.k {
        return Err(Error::Numerical("Lanczos found fewer admissible eigenpairs than requested".into()));
    }
    finish(a, b, pairs, opts)
}

/// One Lanczos run deflated against the locked vectors. Returns the converged Ritz pairs
/// `(θ, x)` whose magnitude ranks among the leading admissible ones.
fn lanczos_pass(
    fact: &SparseFactorization,
    b: &SparseMatrix,
    locked: &Locked,
    opts: &EigenOptions,
    need: usize,
    max_steps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = b.nrows();
    let sigma = opts.sigma;
    let lambda_of = |theta: f64| sigma + 1.0 / theta;

    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    locked.orthogonalize(&mut v);
    let mut bv = b.mul_vec(&v)?;
    let nrm = dot(&v, &bv).sqrt();
    if !(nrm > 0.0) {
        return Ok(Vec::new());
    }
    v.iter_mut().for_each(|x| *x /= nrm);
    bv.iter_mut().for_each(|x| *x /= nrm);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut bbasis: Vec<Vec<f64>> = vec![bv];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let check_every = 10;
    loop {
        let j = basis.len() - 1;
        let mut w = fact.solve(&bbasis[j])?;
        locked.orthogonalize(&mut w);
        let mut aj = 0.0;
        for _ in 0..2 {
            for (i, bq) in bbasis.iter().enumerate() {
                let c = dot(bq, &w);
                if i == j {
                    aj += c;
                }
                axpy(-c, &basis[i], &mut w);
            }
            locked.orthogonalize(&mut w);
        }
        alpha.push(aj);
        let bw = b.mul_vec(&w)?;
        let bj = dot(&w, &bw).max(0.0).sqrt();
        let steps = alpha.len();
        let scale = alpha.iter().chain(beta.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
        let exhausted = bj <= 1e-13 * scale.max(f64::MIN_POSITIVE) || steps >= max_steps;
        if steps % check_every == 0 || exhausted {
            let (theta, s) = tridiagonal_eigen(&alpha, &beta)?;
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&x, &y| theta[y].abs().total_cmp(&theta[x].abs()));
            let converged = |idx: usize| (bj * s[(steps - 1, idx)]).abs() <= opts.tol * theta[idx].abs();
            let mut admissible = 0;
            let mut all_ok = true;
            let mut picked = Vec::new();
            for &idx in &order {
                if admissible >= need {
                    break;
                }
                if !converged(idx) {
                    all_ok = false;
                    break;
                }
                picked.push(idx);
                if keep(lambda_of(theta[idx]), opts) {
                    admissible += 1;
                }
            }
            if all_ok || exhausted {
                if !all_ok {
                    // Out of room: keep whatever leading pairs did converge.
                    picked = order.iter().copied().take_while(|&i| converged(i)).collect();
                    if picked.is_empty() {
                        return Err(Error::Numerical("Lanczos pass made no progress".into()));
                    }
                }
                let mut out = Vec::with_capacity(picked.len());
                for idx in picked {
                    let mut x = vec![0.0; n];
                    for (i, q) in basis.iter().enumerate() {
                        axpy(s[(i, idx)], q, &mut x);
                    }
                    locked.orthogonalize(&mut x);
                    let bx = b.mul_vec(&x)?;
                    let nx = dot(&x, &bx).sqrt();
                    x.iter_mut().for_each(|e| *e /= nx);
                    out.push((theta[idx], x));
                }
                return Ok(out);
            }
        }
        if exhausted {
            return Err(Error::Numerical("Lanczos basis exhausted".into()));
        }
        beta.push(bj);
        let q: Vec<f64> = w.iter().map(|x| x / bj).collect();
        let bq: Vec<f64> = bw.iter().map(|x| x / bj).collect();
        basis.push(q);
        bbasis.push(bq);
    }
}
