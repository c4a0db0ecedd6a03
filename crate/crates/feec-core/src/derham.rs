//! Broken tensor-product spline de Rham sequences `V⁰ → V¹ → V²` on a multipatch domain.
//!
//! Degrees of freedom are B-spline coefficients. They are numbered patch by patch; inside a
//! patch the tensor index `(i₁, i₂)` maps to `i₁ · n₂ + i₂`, and the first component of a
//! `V¹` field comes before the second.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods exist only when std is linked
use num_traits::Float;

use crate::error::{shape, Error, Result};
use crate::geometry::{det2, inv2, Mat2, MultipatchTopology};
use crate::linalg::{SparseFactorization, SparseMatrix, TripletBuilder};
use crate::splines::{derivative_stencil, gauss_legendre, BasisValues, UnivariateSpace};

/// Physical scalar field.
pub type ScalarFn<'a> = &'a dyn Fn([f64; 2]) -> f64;
/// Physical vector field.
pub type VectorFn<'a> = &'a dyn Fn([f64; 2]) -> [f64; 2];

/// Univariate spaces of one patch: `v0[a]` of degree `p` and `v1[a]` of degree `p − 1` along axis `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSpaces {
    pub v0: [UnivariateSpace; 2],
    pub v1: [UnivariateSpace; 2],
}

impl PatchSpaces {
    /// Shape of the tensor space of component `d` of level `level`.
    pub fn shape(&self, level: usize, d: usize) -> [usize; 2] {
        let (a, b) = self.factors(level, d);
        [a.dim(), b.dim()]
    }

    /// The two univariate factors of component `d` of level `level`.
    pub fn factors(&self, level: usize, d: usize) -> (&UnivariateSpace, &UnivariateSpace) {
        match (level, d) {
            (0, _) => (&self.v0[0], &self.v0[1]),
            (1, 0) => (&self.v1[0], &self.v0[1]),
            (1, _) => (&self.v0[0], &self.v1[1]),
            _ => (&self.v1[0], &self.v1[1]),
        }
    }

    pub fn num_components(level: usize) -> usize {
        if level == 1 {
            2
        } else {
            1
        }
    }

    pub fn dim(&self, level: usize) -> usize {
        (0..Self::num_components(level)).map(|d| self.shape(level, d).iter().product::<usize>()).sum()
    }
}

/// The broken spaces `V⁰_pw, V¹_pw, V²_pw` of a topology with their global numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct DeRhamSpaces {
    pub topology: MultipatchTopology,
    pub patches: Vec<PatchSpaces>,
    offsets: [Vec<usize>; 3],
}

impl DeRhamSpaces {
    pub fn new(topology: MultipatchTopology) -> Result<Self> {
        let patches = topology
            .patches
            .iter()
            .map(|p| {
                let v0 = [UnivariateSpace::new(p.knots[0].clone()), UnivariateSpace::new(p.knots[1].clone())];
                let v1 = [v0[0].derived()?, v0[1].derived()?];
                Ok(PatchSpaces { v0, v1 })
            })
            .collect::<Result<Vec<_>>>()?;
        let offsets = core::array::from_fn(|level| {
            let mut off = vec![0];
            for ps in &patches {
                off.push(off.last().unwrap() + ps.dim(level));
            }
            off
        });
        Ok(Self { topology, patches, offsets })
    }

    pub fn degree(&self) -> usize {
        self.topology.degree()
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    /// Global dimension `N^ℓ`.
    pub fn dim(&self, level: usize) -> usize {
        *self.offsets[level].last().unwrap()
    }

    pub fn patch_offset(&self, level: usize, k: usize) -> usize {
        self.offsets[level][k]
    }

    pub fn patch_range(&self, level: usize, k: usize) -> core::ops::Range<usize> {
        self.offsets[level][k]..self.offsets[level][k + 1]
    }

    pub fn shape(&self, level: usize, k: usize, d: usize) -> [usize; 2] {
        self.patches[k].shape(level, d)
    }

    /// Global index of the first DOF of component `d` on patch `k`.
    pub fn component_offset(&self, level: usize, k: usize, d: usize) -> usize {
        let mut off = self.offsets[level][k];
        if level == 1 && d == 1 {
            let s = self.shape(1, k, 0);
            off += s[0] * s[1];
        }
        off
    }

    /// Global index of the tensor DOF `idx` of component `d` on patch `k`.
    pub fn index(&self, level: usize, k: usize, d: usize, idx: [usize; 2]) -> usize {
        let s = self.shape(level, k, d);
        debug_assert!(idx[0] < s[0] && idx[1] < s[1]);
        self.component_offset(level, k, d) + idx[0] * s[1] + idx[1]
    }

    /// Inverse of [`index`](Self::index): `(patch, component, tensor index)`.
    pub fn locate_dof(&self, level: usize, g: usize) -> (usize, usize, [usize; 2]) {
        let k = self.offsets[level].partition_point(|&o| o <= g) - 1;
        for d in 0..PatchSpaces::num_components(level) {
            let s = self.shape(level, k, d);
            let off = self.component_offset(level, k, d);
            if g < off + s[0] * s[1] {
                let l = g - off;
                return (k, d, [l / s[1], l % s[1]]);
            }
        }
        unreachable!("index inside patch range")
    }
}

fn sparse_from_stencil(nrows: usize, ncols: usize, entries: Vec<(usize, usize, f64)>) -> SparseMatrix {
    let mut b = TripletBuilder::with_capacity(nrows, ncols, entries.len());
    for (i, j, v) in entries {
        b.push(i, j, v);
    }
    b.build()
}

fn derivative_matrix(space: &UnivariateSpace) -> Result<SparseMatrix> {
    Ok(sparse_from_stencil(space.dim() - 1, space.dim(), derivative_stencil(space)?))
}

/// Strong gradient `𝔾: V⁰_pw → V¹_pw`, block diagonal over patches.
pub fn gradient_matrix(spaces: &DeRhamSpaces) -> Result<SparseMatrix> {
    let blocks = spaces
        .patches
        .iter()
        .map(|ps| {
            let d1 = derivative_matrix(&ps.v0[0])?;
            let d2 = derivative_matrix(&ps.v0[1])?;
            let i1 = SparseMatrix::identity(ps.v0[0].dim());
            let i2 = SparseMatrix::identity(ps.v0[1].dim());
            let top = d1.kron(&i2);
            let bottom = i1.kron(&d2);
            Ok(stack_rows(&top, &bottom))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseMatrix::block_diag(&blocks))
}

/// Strong scalar curl `𝓒: V¹_pw → V²_pw`, `curl u = ∂₁u₂ − ∂₂u₁`.
pub fn curl_matrix(spaces: &DeRhamSpaces) -> Result<SparseMatrix> {
    let blocks = spaces
        .patches
        .iter()
        .map(|ps| {
            let d1 = derivative_matrix(&ps.v0[0])?;
            let d2 = derivative_matrix(&ps.v0[1])?;
            let left = SparseMatrix::identity(ps.v1[0].dim()).kron(&d2).scaled(-1.0);
            let right = d1.kron(&SparseMatrix::identity(ps.v1[1].dim()));
            Ok(stack_cols(&left, &right))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseMatrix::block_diag(&blocks))
}

fn stack_rows(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    let mut t = TripletBuilder::with_capacity(a.nrows() + b.nrows(), a.ncols(), a.nnz() + b.nnz());
    for (i, j, v) in a.triplets() {
        t.push(i, j, v);
    }
    for (i, j, v) in b.triplets() {
        t.push(i + a.nrows(), j, v);
    }
    t.build()
}

fn stack_cols(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    let mut t = TripletBuilder::with_capacity(a.nrows(), a.ncols() + b.ncols(), a.nnz() + b.nnz());
    for (i, j, v) in a.triplets() {
        t.push(i, j, v);
    }
    for (i, j, v) in b.triplets() {
        t.push(i, j + a.ncols(), v);
    }
    t.build()
}

/// Gauss points of one axis with the basis values of both univariate spaces at each point.
struct AxisQuadrature {
    points: Vec<f64>,
    weights: Vec<f64>,
    npts: usize,
    v0: Vec<BasisValues>,
    v1: Vec<BasisValues>,
}

impl AxisQuadrature {
    fn new(v0: &UnivariateSpace, v1: &UnivariateSpace, npts: usize) -> Result<Self> {
        let breaks = v0.knot_vector().breakpoints();
        let (gx, gw) = gauss_legendre(npts);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            let h = 0.5 * (w[1] - w[0]);
            for (x, wt) in gx.iter().zip(&gw) {
                points.push(w[0] + h * (x + 1.0));
                weights.push(h * wt);
            }
        }
        let b0 = points.iter().map(|&x| v0.eval_basis(x)).collect::<Result<Vec<_>>>()?;
        let b1 = points.iter().map(|&x| v1.eval_basis(x)).collect::<Result<Vec<_>>>()?;
        Ok(Self { points, weights, npts, v0: b0, v1: b1 })
    }

    fn num_cells(&self) -> usize {
        self.points.len() / self.npts
    }

    fn basis(&self, v1: bool, q: usize) -> &BasisValues {
        if v1 {
            &self.v1[q]
        } else {
            &self.v0[q]
        }
    }
}

/// Whether the factor along axis `a` of component `d` of level `level` is a `V¹`-type space.
fn is_derived(level: usize, d: usize, a: usize) -> bool {
    match level {
        0 => false,
        1 => d == a,
        _ => true,
    }
}

/// Geometric data at one logical quadrature point.
struct Geometry {
    x: [f64; 2],
    jac: Mat2,
    det: f64,
}

fn patch_quadrature(spaces: &DeRhamSpaces, k: usize, extra: usize) -> Result<[AxisQuadrature; 2]> {
    let ps = &spaces.patches[k];
    let npts = spaces.degree() + 1 + extra;
    Ok([AxisQuadrature::new(&ps.v0[0], &ps.v1[0], npts)?, AxisQuadrature::new(&ps.v0[1], &ps.v1[1], npts)?])
}

/// Visits every tensor quadrature point of patch `k`, cell by cell.
fn for_each_point(
    spaces: &DeRhamSpaces,
    k: usize,
    q: &[AxisQuadrature; 2],
    mut f: impl FnMut((usize, usize), (usize, usize), f64, &Geometry) -> Result<()>,
) -> Result<()> {
    let mapping = &spaces.topology.patches[k].mapping;
    for c1 in 0..q[0].num_cells() {
        for c2 in 0..q[1].num_cells() {
            for a in 0..q[0].npts {
                let q1 = c1 * q[0].npts + a;
                for b in 0..q[1].npts {
                    let q2 = c2 * q[1].npts + b;
                    let (s, t) = (q[0].points[q1], q[1].points[q2]);
                    let jac = mapping.jacobian(s, t);
                    let det = det2(&jac);
                    if !(det > 0.0) {
                        return Err(Error::Geometry(alloc::format!("singular Jacobian on patch {k} at ({s}, {t})")));
                    }
                    let g = Geometry { x: mapping.map(s, t), jac, det };
                    f((c1, c2), (q1, q2), q[0].weights[q1] * q[1].weights[q2], &g)?;
                }
            }
        }
    }
    Ok(())
}

/// Local tensor basis of component `d` at a quadrature point: `(local tensor index, value)`.
fn local_basis(
    q: &[AxisQuadrature; 2],
    level: usize,
    d: usize,
    (q1, q2): (usize, usize),
    shape: [usize; 2],
    out: &mut Vec<(usize, f64)>,
) {
    out.clear();
    let b1 = q[0].basis(is_derived(level, d, 0), q1);
    let b2 = q[1].basis(is_derived(level, d, 1), q2);
    for (i1, v1) in b1.iter() {
        for (i2, v2) in b2.iter() {
            out.push((i1 * shape[1] + i2, v1 * v2));
        }
    }
}

/// Mass matrix `M^ℓ` of level `ℓ` with pushforward-weighted integrands.
pub fn mass_matrix(spaces: &DeRhamSpaces, level: usize) -> Result<SparseMatrix> {
    if level > 2 {
        return Err(Error::Parameter("level must be 0, 1 or 2".into()));
    }
    let blocks = (0..spaces.num_patches()).map(|k| patch_mass(spaces, level, k)).collect::<Result<Vec<_>>>()?;
    Ok(SparseMatrix::block_diag(&blocks))
}

/// Mass block of one patch (local numbering).
pub fn patch_mass(spaces: &DeRhamSpaces, level: usize, k: usize) -> Result<SparseMatrix> {
    let ps = &spaces.patches[k];
    let q = patch_quadrature(spaces, k, 0)?;
    let ncomp = PatchSpaces::num_components(level);
    let shapes: Vec<[usize; 2]> = (0..ncomp).map(|d| ps.shape(level, d)).collect();
    let offs: Vec<usize> = (0..ncomp).map(|d| if d == 0 { 0 } else { shapes[0][0] * shapes[0][1] }).collect();
    let n = ps.dim(level);
    let p = spaces.degree();
    let local = (p + 1) * (p + 1);
    let mut builder = TripletBuilder::with_capacity(n, n, q[0].num_cells() * q[1].num_cells() * local * local * ncomp * ncomp);
    // Dense element matrix of the current cell; `rows` holds the patch-local index of each slot.
    let mut cell: Option<(usize, usize)> = None;
    let mut rows: Vec<usize> = Vec::new();
    let mut elem: Vec<f64> = Vec::new();
    let mut bases: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncomp];
    let flush = |rows: &[usize], elem: &[f64], builder: &mut TripletBuilder| {
        let m = rows.len();
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in rows.iter().enumerate() {
                builder.push(i, j, elem[a * m + b]);
            }
        }
    };
    let mut slot_off = vec![0usize; ncomp + 1];
    for_each_point(spaces, k, &q, |c, qp, w, g| {
        for d in 0..ncomp {
            local_basis(&q, level, d, qp, shapes[d], &mut bases[d]);
        }
        if cell != Some(c) {
            flush(&rows, &elem, &mut builder);
            cell = Some(c);
            rows.clear();
            for d in 0..ncomp {
                slot_off[d] = rows.len();
                rows.extend(bases[d].iter().map(|&(i, _)| offs[d] + i));
            }
            slot_off[ncomp] = rows.len();
            elem.clear();
            elem.resize(rows.len() * rows.len(), 0.0);
        }
        let m = rows.len();
        let ji = inv2(&g.jac);
        for d in 0..ncomp {
            for e in 0..ncomp {
                let weight = match level {
                    0 => g.det,
                    // (DFᵀ DF)⁻¹ = DF⁻¹ DF⁻ᵀ
                    1 => (ji[d][0] * ji[e][0] + ji[d][1] * ji[e][1]) * g.det,
                    _ => 1.0 / g.det,
                };
                let wde = w * weight;
                if wde == 0.0 {
                    continue;
                }
                for (a, &(_, vi)) in bases[d].iter().enumerate() {
                    let row = &mut elem[(slot_off[d] + a) * m + slot_off[e]..];
                    for (b, &(_, vj)) in bases[e].iter().enumerate() {
                        row[b] += wde * vi * vj;
                    }
                }
            }
        }
        Ok(())
    })?;
    flush(&rows, &elem, &mut builder);
    Ok(builder.build())
}

/// Load vector `fᵢ = ⟨v, Λ^ℓ_i⟩` of a scalar field for `ℓ ∈ {0, 2}`.
pub fn load_scalar(spaces: &DeRhamSpaces, level: usize, v: ScalarFn<'_>) -> Result<Vec<f64>> {
    if level == 1 {
        return Err(Error::Parameter("scalar loads live on levels 0 and 2".into()));
    }
    let mut out = vec![0.0; spaces.dim(level)];
    let mut basis = Vec::new();
    for k in 0..spaces.num_patches() {
        let q = patch_quadrature(spaces, k, 1)?;
        let off = spaces.patch_offset(level, k);
        let sh = spaces.shape(level, k, 0);
        for_each_point(spaces, k, &q, |_, qp, w, g| {
            local_basis(&q, level, 0, qp, sh, &mut basis);
            let val = v(g.x) * w * if level == 0 { g.det } else { 1.0 };
            for &(i, b) in &basis {
                out[off + i] += val * b;
            }
            Ok(())
        })?;
    }
    Ok(out)
}

/// Load vector `fᵢ = ⟨v, Λ¹_i⟩` of a vector field.
pub fn load_vector(spaces: &DeRhamSpaces, v: VectorFn<'_>) -> Result<Vec<f64>> {
    let mut out = vec![0.0; spaces.dim(1)];
    let mut basis = Vec::new();
    for k in 0..spaces.num_patches() {
        let q = patch_quadrature(spaces, k, 1)?;
        for_each_point(spaces, k, &q, |_, qp, w, g| {
            let val = v(g.x);
            let ji = inv2(&g.jac);
            for d in 0..2 {
                // v · DF⁻ᵀ e_d = Σ_i v_i (DF⁻¹)_{d i}
                let proj = (val[0] * ji[d][0] + val[1] * ji[d][1]) * g.det * w;
                let off = spaces.component_offset(1, k, d);
                local_basis(&q, 1, d, qp, spaces.shape(1, k, d), &mut basis);
                for &(i, b) in &basis {
                    out[off + i] += proj * b;
                }
            }
            Ok(())
        })?;
    }
    Ok(out)
}

/// Patchwise Cholesky solver for a block-diagonal mass matrix.
#[derive(Debug, Clone)]
pub struct MassSolver {
    level: usize,
    offsets: Vec<usize>,
    blocks: Vec<SparseFactorization>,
}

impl MassSolver {
    pub fn new(spaces: &DeRhamSpaces, level: usize) -> Result<Self> {
        let blocks = (0..spaces.num_patches())
            .map(|k| SparseFactorization::cholesky(&patch_mass(spaces, level, k)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { level, offsets: spaces.offsets[level].clone(), blocks })
    }

    /// Factors the diagonal blocks of an assembled block-diagonal matrix.
    pub fn from_matrix(spaces: &DeRhamSpaces, level: usize, m: &SparseMatrix) -> Result<Self> {
        let offsets = spaces.offsets[level].clone();
        let blocks = offsets
            .windows(2)
            .map(|w| SparseFactorization::cholesky(&m.block(w[0]..w[1], w[0]..w[1])))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { level, offsets, blocks })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != *self.offsets.last().unwrap() {
            return Err(shape("right-hand side length differs from the mass matrix size"));
        }
        let mut x = Vec::with_capacity(b.len());
        for (w, f) in self.offsets.windows(2).zip(&self.blocks) {
            x.extend(f.solve(&b[w[0]..w[1]])?);
        }
        Ok(x)
    }
}

/// A coefficient vector of one level of the broken sequence.
#[derive(Debug, Clone)]
pub struct FemField {
    pub spaces: Arc<DeRhamSpaces>,
    pub level: usize,
    pub coeffs: Vec<f64>,
}

/// Value of a field at a point: scalar for levels 0 and 2, vector for level 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Scalar(f64),
    Vector([f64; 2]),
}

impl FieldValue {
    pub fn magnitude(&self) -> f64 {
        match *self {
            FieldValue::Scalar(v) => v.abs(),
            FieldValue::Vector(v) => v[0].hypot(v[1]),
        }
    }
}

impl FemField {
    pub fn new(spaces: Arc<DeRhamSpaces>, level: usize, coeffs: Vec<f64>) -> Result<Self> {
        if level > 2 {
            return Err(Error::Parameter("level must be 0, 1 or 2".into()));
        }
        if coeffs.len() != spaces.dim(level) {
            return Err(shape("coefficient count differs from the space dimension"));
        }
        Ok(Self { spaces, level, coeffs })
    }

    pub fn zeros(spaces: Arc<DeRhamSpaces>, level: usize) -> Self {
        let n = spaces.dim(level);
        Self { spaces, level, coeffs: vec![0.0; n] }
    }

    /// Logical (pulled-back) components at `(s, t)` on patch `k`.
    pub fn eval_logical(&self, k: usize, s: f64, t: f64) -> Result<FieldValue> {
        let ps = &self.spaces.patches[k];
        let mut comp = [0.0; 2];
        for d in 0..PatchSpaces::num_components(self.level) {
            let (a, b) = ps.factors(self.level, d);
            let ba = a.eval_basis(s)?;
            let bb = b.eval_basis(t)?;
            let off = self.spaces.component_offset(self.level, k, d);
            let n2 = b.dim();
            for (i1, v1) in ba.iter() {
                for (i2, v2) in bb.iter() {
                    comp[d] += self.coeffs[off + i1 * n2 + i2] * v1 * v2;
                }
            }
        }
        Ok(if self.level == 1 { FieldValue::Vector(comp) } else { FieldValue::Scalar(comp[0]) })
    }

    /// Physical value at the image of `(s, t)` on patch `k` (pushforward of the logical value).
    pub fn eval_patch(&self, k: usize, s: f64, t: f64) -> Result<FieldValue> {
        let jac = self.spaces.topology.patches[k].mapping.jacobian(s, t);
        Ok(match self.eval_logical(k, s, t)? {
            FieldValue::Scalar(v) if self.level == 2 => FieldValue::Scalar(v / det2(&jac)),
            FieldValue::Vector(u) => {
                let ji = inv2(&jac);
                FieldValue::Vector([ji[0][0] * u[0] + ji[1][0] * u[1], ji[0][1] * u[0] + ji[1][1] * u[1]])
            }
            v => v,
        })
    }

    /// Physical value at a physical point.
    pub fn eval_physical(&self, x: [f64; 2]) -> Result<FieldValue> {
        let (k, u) = self.spaces.topology.locate(x)?;
        self.eval_patch(k, u[0], u[1])
    }

    /// `‖v_h − v‖_{L²(Ω)}` for a scalar field (levels 0 and 2).
    pub fn l2_error_scalar(&self, exact: ScalarFn<'_>) -> Result<f64> {
        self.l2_error(&|x, val| match val {
            FieldValue::Scalar(v) => {
                let e = v - exact(x);
                e * e
            }
            FieldValue::Vector(_) => f64::NAN,
        })
    }

    /// `‖u_h − u‖_{L²(Ω)}` for a vector field (level 1).
    pub fn l2_error_vector(&self, exact: VectorFn<'_>) -> Result<f64> {
        self.l2_error(&|x, val| match val {
            FieldValue::Vector(u) => {
                let e = exact(x);
                (u[0] - e[0]).powi(2) + (u[1] - e[1]).powi(2)
            }
            FieldValue::Scalar(_) => f64::NAN,
        })
    }

    pub fn l2_norm(&self) -> Result<f64> {
        self.l2_error(&|_, val| val.magnitude().powi(2))
    }

    fn l2_error(&self, integrand: &dyn Fn([f64; 2], FieldValue) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for k in 0..self.spaces.num_patches() {
            let q = patch_quadrature(&self.spaces, k, 2)?;
            for_each_point(&self.spaces, k, &q, |_, (q1, q2), w, g| {
                let val = self.eval_patch(k, q[0].points[q1], q[1].points[q2])?;
                total += w * g.det * integrand(g.x, val);
                Ok(())
            })?;
        }
        if total.is_nan() {
            return Err(Error::Usage("field level does not match the exact solution type".into()));
        }
        Ok(total.max(0.0).sqrt())
    }
}

/// Broken L² projection of a scalar field onto `V⁰_pw` or `V²_pw`.
pub fn l2_project_scalar(spaces: &Arc<DeRhamSpaces>, level: usize, v: ScalarFn<'_>) -> Result<FemField> {
    let f = load_scalar(spaces, level, v)?;
    let c = MassSolver::new(spaces, level)?.solve(&f)?;
    FemField::new(spaces.clone(), level, c)
}

/// Broken L² projection of a vector field onto `V¹_pw`.
pub fn l2_project_vector(spaces: &Arc<DeRhamSpaces>, v: VectorFn<'_>) -> Result<FemField> {
    let f = load_vector(spaces, v)?;
    let c = MassSolver::new(spaces, 1)?.solve(&f)?;
    FemField::new(spaces.clone(), 1, c)
}
