//! Univariate clamped B-spline spaces on `[0, 1]`: evaluation, quadrature, the derivative map,
//! knot insertion and the Bernstein moment systems that define the γ correction weights.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods exist only when std is linked
use num_traits::Float;

use crate::error::{param, shape, Error, Result};
use crate::linalg::dense::{condition_number_1, DenseMatrix};

const KNOT_TOL: f64 = 1e-12;

/// Open (clamped) knot sequence on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    /// Validates an explicit knot sequence.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 * (degree + 1) {
            return Err(param("knot vector is too short for its degree"));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(param("knots must be nondecreasing"));
        }
        let m = knots.len();
        if knots[..=degree].iter().any(|&k| k != 0.0) || knots[m - degree - 1..].iter().any(|&k| k != 1.0) {
            return Err(param("knot vector must be clamped at 0 and 1"));
        }
        let interior = &knots[degree + 1..m - degree - 1];
        if interior.iter().any(|&k| !(0.0..1.0).contains(&k) || k == 0.0) {
            return Err(param("interior knots must lie strictly inside (0, 1)"));
        }
        Ok(Self { degree, knots })
    }

    /// Knot vector with simple interior knots at the given breakpoints (which include 0 and 1).
    pub fn from_breakpoints(degree: usize, breaks: &[f64]) -> Result<Self> {
        if breaks.len() < 2 || breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(param("breakpoints must start at 0 and end at 1"));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(param("breakpoints must be strictly increasing"));
        }
        let mut knots = vec![0.0; degree + 1];
        knots.extend_from_slice(&breaks[1..breaks.len() - 1]);
        knots.extend(core::iter::repeat(1.0).take(degree + 1));
        Self::new(degree, knots)
    }

    /// Uniform partition of `[0, 1]` into `cells` intervals.
    pub fn uniform(degree: usize, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(param("at least one cell is required"));
        }
        let breaks: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
        Self::from_breakpoints(degree, &breaks)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of B-splines of the space.
    pub fn dim(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Distinct knot values including the endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = Vec::with_capacity(self.knots.len());
        for &k in &self.knots {
            if b.last().map_or(true, |&l| k > l) {
                b.push(k);
            }
        }
        b
    }

    pub fn num_cells(&self) -> usize {
        self.breakpoints().len() - 1
    }

    /// Knot vector of the derivative space: degree `p − 1` with the first and last knot removed.
    pub fn derived(&self) -> Result<Self> {
        if self.degree == 0 {
            return Err(param("degree-0 spaces have no derivative space"));
        }
        Ok(Self { degree: self.degree - 1, knots: self.knots[1..self.knots.len() - 1].to_vec() })
    }

    /// Mirror image under `x ↦ 1 − x`.
    pub fn reversed(&self) -> Self {
        let knots = self.knots.iter().rev().map(|&k| 1.0 - k).collect();
        Self { degree: self.degree, knots }
    }

    /// Splits every cell into `factor` equal sub-cells, keeping knot multiplicities.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(param("refinement factor must be positive"));
        }
        let breaks = self.breakpoints();
        let mut knots = Vec::new();
        let p = self.degree;
        let mult = |x: f64| self.knots.iter().filter(|&&k| k == x).count();
        for (c, w) in breaks.windows(2).enumerate() {
            let m = if c == 0 { p + 1 } else { mult(w[0]) };
            knots.extend(core::iter::repeat(w[0]).take(m));
            for s in 1..factor {
                knots.push(w[0] + (w[1] - w[0]) * s as f64 / factor as f64);
            }
        }
        knots.extend(core::iter::repeat(1.0).take(p + 1));
        Self::new(p, knots)
    }

    /// True when every knot of `self` (with multiplicity) also appears in `other`.
    pub fn is_nested_in(&self, other: &KnotVector) -> bool {
        self.degree == other.degree && knot_difference(&self.knots, &other.knots).is_some()
    }

    /// True when both vectors agree knot by knot within a small tolerance.
    pub fn approx_eq(&self, other: &KnotVector) -> bool {
        self.degree == other.degree
            && self.knots.len() == other.knots.len()
            && self.knots.iter().zip(&other.knots).all(|(a, b)| (a - b).abs() <= KNOT_TOL)
    }
}

/// Knots of `fine` that are not matched by knots of `coarse`, or `None` if `coarse ⊄ fine`.
fn knot_difference(coarse: &[f64], fine: &[f64]) -> Option<Vec<f64>> {
    let mut extra = Vec::new();
    let mut i = 0;
    for &f in fine {
        if i < coarse.len() && (coarse[i] - f).abs() <= KNOT_TOL {
            i += 1;
        } else if i < coarse.len() && coarse[i] < f {
            return None;
        } else {
            extra.push(f);
        }
    }
    (i == coarse.len()).then_some(extra)
}

/// Nonzero basis values at one point: `values[j]` belongs to basis function `first + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisValues {
    pub first: usize,
    pub values: Vec<f64>,
}

impl BasisValues {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(move |(j, &v)| (self.first + j, v))
    }
}

/// Spline space spanned by the B-splines of a knot vector.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSpace {
    knots: KnotVector,
}

impl UnivariateSpace {
    pub fn new(knots: KnotVector) -> Self {
        Self { knots }
    }

    pub fn uniform(degree: usize, cells: usize) -> Result<Self> {
        Ok(Self::new(KnotVector::uniform(degree, cells)?))
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.knots.degree
    }

    pub fn dim(&self) -> usize {
        self.knots.dim()
    }

    /// Space of derivatives (degree `p − 1`, knots without the outermost pair).
    pub fn derived(&self) -> Result<Self> {
        Ok(Self::new(self.knots.derived()?))
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.knots.reversed())
    }

    /// Knot span index `μ` with `ξ_μ ≤ x < ξ_{μ+1}`; the right endpoint maps to the last span.
    fn span(&self, x: f64) -> usize {
        let p = self.degree();
        let n = self.dim();
        let u = &self.knots.knots;
        if x >= u[n] {
            return n - 1;
        }
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if x < u[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// The `p + 1` possibly nonzero basis values at `x` (Cox–de Boor recursion).
    pub fn eval_basis(&self, x: f64) -> Result<BasisValues> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(x));
        }
        let p = self.degree();
        let u = &self.knots.knots;
        let i = self.span(x);
        let mut n = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        n[0] = 1.0;
        for j in 1..=p {
            left[j] = x - u[i + 1 - j];
            right[j] = u[i + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        Ok(BasisValues { first: i - p, values: n })
    }

    /// Value of the spline with the given coefficients.
    pub fn eval(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        if coeffs.len() != self.dim() {
            return Err(shape("coefficient count differs from the space dimension"));
        }
        Ok(self.eval_basis(x)?.iter().map(|(i, v)| coeffs[i] * v).sum())
    }

    /// Knot averages (Greville abscissae).
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree();
        let u = &self.knots.knots;
        if p == 0 {
            return (0..self.dim()).map(|i| 0.5 * (u[i] + u[i + 1])).collect();
        }
        (0..self.dim()).map(|i| u[i + 1..=i + p].iter().sum::<f64>() / p as f64).collect()
    }

    /// Integrals `∫ λ_i` over `[0, 1]`.
    pub fn integrals(&self) -> Vec<f64> {
        let p = self.degree();
        let u = &self.knots.knots;
        (0..self.dim()).map(|i| (u[i + p + 1] - u[i]) / (p + 1) as f64).collect()
    }
}

/// Coefficients of the derivative in the derived space:
/// `c¹_i = p (c_{i+1} − c_i) / (ξ_{i+p+1} − ξ_{i+1})`.
pub fn derivative_coeffs(space: &UnivariateSpace, coeffs: &[f64]) -> Result<Vec<f64>> {
    if coeffs.len() != space.dim() {
        return Err(shape("coefficient count differs from the space dimension"));
    }
    let p = space.degree();
    if p == 0 {
        return Err(param("degree-0 spaces have no derivative space"));
    }
    let u = space.knots.knots();
    Ok((0..space.dim() - 1)
        .map(|i| p as f64 * (coeffs[i + 1] - coeffs[i]) / (u[i + p + 1] - u[i + 1]))
        .collect())
}

/// Sparse matrix form of [`derivative_coeffs`]: `(dim − 1) × dim` entries `(row, col, value)`.
pub fn derivative_stencil(space: &UnivariateSpace) -> Result<Vec<(usize, usize, f64)>> {
    let p = space.degree();
    if p == 0 {
        return Err(param("degree-0 spaces have no derivative space"));
    }
    let u = space.knots.knots();
    let mut out = Vec::with_capacity(2 * space.dim());
    for i in 0..space.dim() - 1 {
        let s = p as f64 / (u[i + p + 1] - u[i + 1]);
        out.push((i, i, -s));
        out.push((i, i + 1, s));
    }
    Ok(out)
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Tensorizable 1D quadrature: Gauss points on each cell of a partition of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Number of points per cell; cell `c` owns `points[c*npts..(c+1)*npts]`.
    pub points_per_cell: usize,
}

impl QuadratureRule {
    pub fn on_breakpoints(breaks: &[f64], npts: usize) -> Self {
        let (gx, gw) = gauss_legendre(npts);
        let mut points = Vec::with_capacity((breaks.len() - 1) * npts);
        let mut weights = Vec::with_capacity(points.capacity());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let h = 0.5 * (b - a);
            for (x, wt) in gx.iter().zip(&gw) {
                points.push(a + h * (x + 1.0));
                weights.push(h * wt);
            }
        }
        Self { points, weights, points_per_cell: npts }
    }

    /// Rule with `p + 1` points per cell of the space's partition.
    pub fn for_space(space: &UnivariateSpace) -> Self {
        Self::on_breakpoints(&space.knots.breakpoints(), space.degree() + 1)
    }

    pub fn num_cells(&self) -> usize {
        self.points.len() / self.points_per_cell.max(1)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn merged_breakpoints(a: &UnivariateSpace, b: &UnivariateSpace) -> Vec<f64> {
    let mut all = a.knots.breakpoints();
    all.extend(b.knots.breakpoints());
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        if out.last().map_or(true, |&l| x - l > KNOT_TOL) {
            out.push(x);
        }
    }
    out
}

/// Gram matrix `⟨λ^row_i, λ^col_j⟩_{L²(0,1)}`, exact for polynomial products.
pub fn mass_matrix_1d(rowspace: &UnivariateSpace, colspace: &UnivariateSpace) -> DenseMatrix {
    let breaks = merged_breakpoints(rowspace, colspace);
    let npts = rowspace.degree().max(colspace.degree()) + 1;
    let rule = QuadratureRule::on_breakpoints(&breaks, npts);
    let mut m = DenseMatrix::zeros(rowspace.dim(), colspace.dim());
    for (&x, &w) in rule.points.iter().zip(&rule.weights) {
        let br = rowspace.eval_basis(x).expect("quadrature point in [0,1]");
        let bc = colspace.eval_basis(x).expect("quadrature point in [0,1]");
        for (i, vi) in br.iter() {
            for (j, vj) in bc.iter() {
                m[(i, j)] += w * vi * vj;
            }
        }
    }
    m
}

/// Bernstein-type polynomials `q_j(x) = C(r, j) x^{j−1} (1 − x)^{r−j}`, `j = 1..=r`.
pub fn bernstein_basis(r: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(r);
    let mut binom = 1.0;
    for j in 1..=r {
        binom = binom * (r + 1 - j) as f64 / j as f64;
        out.push(binom * x.powi(j as i32 - 1) * (1.0 - x).powi((r - j) as i32));
    }
    out
}

/// The duality system defining the 1D correction weights γ for moment order `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSystem {
    pub order: usize,
    /// `M[m−1][j−1] = ∫ λ_m q_j` for `m, j = 1..=r`.
    pub matrix: DenseMatrix,
    /// `b[j−1] = ∫ λ_0 q_j`.
    pub rhs: Vec<f64>,
    pub gamma: Vec<f64>,
    pub condition: f64,
}

/// γ weights at the left end `x = 0` of the space. Use [`moment_system_at_end`] for `x = 1`.
pub fn moment_system(space: &UnivariateSpace, r: usize) -> Result<MomentSystem> {
    let p = space.degree();
    if r > p + 1 {
        return Err(param(format!("moment order {r} exceeds p + 1 = {}", p + 1)));
    }
    if r + 1 > space.dim() {
        return Err(param("moment order too large for the number of basis functions"));
    }
    if r == 0 {
        return Ok(MomentSystem { order: 0, matrix: DenseMatrix::zeros(0, 0), rhs: Vec::new(), gamma: Vec::new(), condition: 1.0 });
    }
    let rule = QuadratureRule::on_breakpoints(&space.knots.breakpoints(), p + r + 1);
    // M is stored transposed (row = polynomial) so that M γ = b reads Σ_m γ_m ∫λ_m q_j = ∫λ_0 q_j.
    let mut mt = DenseMatrix::zeros(r, r);
    let mut rhs = vec![0.0; r];
    for (&x, &w) in rule.points.iter().zip(&rule.weights) {
        let q = bernstein_basis(r, x);
        let basis = space.eval_basis(x)?;
        for (i, v) in basis.iter() {
            if i == 0 {
                for j in 0..r {
                    rhs[j] += w * v * q[j];
                }
            } else if i <= r {
                for j in 0..r {
                    mt[(j, i - 1)] += w * v * q[j];
                }
            }
        }
    }
    let condition = condition_number_1(&mt)?;
    if condition > 1e8 {
        log::warn!("moment system of order {r} is ill-conditioned (condition estimate {condition:.3e})");
    }
    let gamma = mt.lu()?.solve(&rhs)?;
    Ok(MomentSystem { order: r, matrix: mt.transpose(), rhs, gamma, condition })
}

/// γ weights at the right end `x = 1`; `gamma[m−1]` multiplies `λ_{n−m}`.
pub fn moment_system_at_end(space: &UnivariateSpace, r: usize) -> Result<MomentSystem> {
    moment_system(&space.reversed(), r)
}

/// Matrix `E` (fine dim × coarse dim) with `λ^coarse_i = Σ_j E_{j,i} λ^fine_j`, built by
/// sequential Boehm knot insertion.
pub fn knot_insertion_matrix(coarse: &UnivariateSpace, fine: &UnivariateSpace) -> Result<DenseMatrix> {
    if coarse.degree() != fine.degree() {
        return Err(Error::NotNested("spaces have different degrees".into()));
    }
    let extra = knot_difference(coarse.knots.knots(), fine.knots.knots())
        .ok_or_else(|| Error::NotNested("coarse knots are not a subsequence of the fine knots".into()))?;
    let p = coarse.degree();
    let mut knots = coarse.knots.knots().to_vec();
    // rows[i] holds the coarse-coefficient combination of the current i-th control value.
    let mut rows: Vec<Vec<f64>> = (0..coarse.dim())
        .map(|i| {
            let mut r = vec![0.0; coarse.dim()];
            r[i] = 1.0;
            r
        })
        .collect();
    for u in extra {
        let k = knots.iter().rposition(|&t| t <= u).unwrap();
        let k = k.min(knots.len() - p - 2);
        let mut new_rows = Vec::with_capacity(rows.len() + 1);
        for i in 0..=rows.len() {
            if i + p <= k {
                new_rows.push(rows[i].clone());
            } else if i > k {
                new_rows.push(rows[i - 1].clone());
            } else {
                let a = (u - knots[i]) / (knots[i + p] - knots[i]);
                let row: Vec<f64> = rows[i].iter().zip(&rows[i - 1]).map(|(x, y)| a * x + (1.0 - a) * y).collect();
                new_rows.push(row);
            }
        }
        rows = new_rows;
        knots.insert(k + 1, u);
    }
    let mut e = DenseMatrix::zeros(rows.len(), coarse.dim());
    for (i, r) in rows.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            e[(i, j)] = v;
        }
    }
    Ok(e)
}
