//! Moment-preserving conforming projections `ℙ⁰` and `ℙ¹` for broken spline spaces on
//! multipatch domains with nested, possibly non-matching, interface resolutions.
//!
//! Each local projection (one per vertex or edge) is stored as an identity matrix whose
//! columns for the affected basis functions are replaced by their projected images. The
//! global projection is the product of all local ones.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::derham::DeRhamSpaces;
use crate::error::{param, Error, Result};
use crate::geometry::{boundary_frame, edge_local_frame, Edge, SideFrame, Vertex};
use crate::linalg::{DenseMatrix, SparseMatrix, TripletBuilder};
use crate::splines::{knot_insertion_matrix, mass_matrix_1d, moment_system, moment_system_at_end, UnivariateSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryCondition {
    #[default]
    None,
    Homogeneous,
}

/// Order in which the local factors are multiplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorOrder {
    /// Vertices by id, then edges by id.
    #[default]
    Canonical,
    /// Both groups in descending id order.
    Reversed,
}

/// γ weights of order `r` at one end of a univariate space.
pub fn end_gamma(space: &UnivariateSpace, r: usize, at_end: bool) -> Result<Vec<f64>> {
    let sys = if at_end { moment_system_at_end(space, r)? } else { moment_system(space, r)? };
    Ok(sys.gamma)
}

fn check_nested(coarse: &UnivariateSpace, fine: &UnivariateSpace) -> Result<()> {
    if !coarse.knot_vector().is_nested_in(fine.knot_vector()) {
        return Err(Error::NotNested("coarse trace space is not contained in the fine one".into()));
    }
    Ok(())
}

/// Moment-preserving restriction `R⁰` (coarse dim × fine dim) from a fine to a nested coarse
/// `V⁰`-type trace space. Endpoint values are kept; the interior part is the L² projection of
/// the endpoint-free remainder with γ corrections replacing the dropped endpoint coefficients.
pub fn restriction_v0(coarse: &UnivariateSpace, fine: &UnivariateSpace, r: usize) -> Result<DenseMatrix> {
    check_nested(coarse, fine)?;
    let e = knot_insertion_matrix(coarse, fine)?;
    let nc = coarse.dim() - 1;
    let nf = fine.dim() - 1;
    let g0 = end_gamma(coarse, r, false)?;
    let g1 = end_gamma(coarse, r, true)?;

    // T: fine full -> fine interior, removing the coarse endpoint functions.
    let t = DenseMatrix::from_fn(nf - 1, nf + 1, |a, col| {
        let l = a + 1;
        let mut v = if col == l { 1.0 } else { 0.0 };
        if col == 0 {
            v -= e[(l, 0)];
        }
        if col == nf {
            v -= e[(l, nc)];
        }
        v
    });
    let mcc = mass_matrix_1d(coarse, coarse);
    let mcf = mass_matrix_1d(coarse, fine);
    let mcf_int = DenseMatrix::from_fn(nc + 1, nf - 1, |i, a| mcf[(i, a + 1)]);
    let rt = mcc.lu()?.solve_matrix(&mcf_int)?;
    // T̃: coarse full -> coarse interior with γ corrections for the endpoint coefficients.
    let tt = DenseMatrix::from_fn(nc - 1, nc + 1, |a, col| {
        let i = a + 1;
        if col == i {
            1.0
        } else if col == 0 && i <= r {
            g0[i - 1]
        } else if col == nc && nc - i >= 1 && nc - i <= r {
            g1[nc - i - 1]
        } else {
            0.0
        }
    });
    let r0 = tt.matmul(&rt)?.matmul(&t)?;
    Ok(DenseMatrix::from_fn(nc + 1, nf + 1, |i, j| {
        if i == 0 {
            (j == 0) as u8 as f64
        } else if i == nc {
            (j == nf) as u8 as f64
        } else {
            r0[(i - 1, j)]
        }
    }))
}

/// L² restriction `R¹ = (M⁻⁻)⁻¹ M⁻⁺` between nested `V¹`-type trace spaces.
pub fn restriction_v1(coarse: &UnivariateSpace, fine: &UnivariateSpace) -> Result<DenseMatrix> {
    check_nested(coarse, fine)?;
    let mcc = mass_matrix_1d(coarse, coarse);
    let mcf = mass_matrix_1d(coarse, fine);
    mcc.lu()?.solve_matrix(&mcf)
}

/// Trace operators of one interior edge in its canonical frame.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceOperators {
    pub edge: usize,
    pub coarse: UnivariateSpace,
    pub fine: UnivariateSpace,
    pub e0: DenseMatrix,
    pub r0: DenseMatrix,
    pub e1: DenseMatrix,
    pub r1: DenseMatrix,
}

/// Parallel trace space of a side, oriented along the canonical edge direction.
fn trace_space(spaces: &DeRhamSpaces, f: &SideFrame) -> UnivariateSpace {
    let s = &spaces.patches[f.patch].v0[f.parallel_axis];
    if f.reversed {
        s.reversed()
    } else {
        s.clone()
    }
}

pub fn interface_operators(spaces: &DeRhamSpaces, edge: &Edge, r: usize) -> Result<InterfaceOperators> {
    let fr = edge_local_frame(edge)?;
    let coarse = trace_space(spaces, &fr.minus);
    let fine = trace_space(spaces, &fr.plus);
    let e0 = knot_insertion_matrix(&coarse, &fine)?;
    let r0 = restriction_v0(&coarse, &fine, r)?;
    let (c1, f1) = (coarse.derived()?, fine.derived()?);
    let e1 = knot_insertion_matrix(&c1, &f1)?;
    let r1 = restriction_v1(&c1, &f1)?;
    Ok(InterfaceOperators { edge: edge.id, coarse, fine, e0, r0, e1, r1 })
}

/// Identity matrix with selected columns replaced.
struct ColumnUpdates {
    n: usize,
    cols: BTreeMap<usize, BTreeMap<usize, f64>>,
}

impl ColumnUpdates {
    fn new(n: usize) -> Self {
        Self { n, cols: BTreeMap::new() }
    }

    /// Marks `col` as replaced (initially by zero).
    fn replace(&mut self, col: usize) {
        self.cols.entry(col).or_default();
    }

    fn add(&mut self, col: usize, row: usize, v: f64) {
        if v != 0.0 {
            *self.cols.entry(col).or_default().entry(row).or_insert(0.0) += v;
        }
    }

    fn into_matrix(self) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.n, self.n, self.n + self.cols.values().map(|c| c.len()).sum::<usize>());
        for c in 0..self.n {
            match self.cols.get(&c) {
                Some(entries) => {
                    for (&row, &v) in entries {
                        b.push(row, c, v);
                    }
                }
                None => b.push(c, c, 1.0),
            }
        }
        b.build()
    }
}

fn check_order(spaces: &DeRhamSpaces, level: usize, r: usize) -> Result<()> {
    let p = spaces.degree();
    let cap = if level == 0 { p + 1 } else { p };
    if r > cap {
        return Err(param(format!("moment order {r} exceeds the maximum {cap} for level {level}")));
    }
    Ok(())
}

/// Local vertex projection on `V⁰_pw` (full `N⁰ × N⁰` matrix).
pub fn vertex_projection(spaces: &DeRhamSpaces, vertex: &Vertex, r: usize, bc: BoundaryCondition) -> Result<SparseMatrix> {
    check_order(spaces, 0, r)?;
    let n = spaces.dim(0);
    let mut up = ColumnUpdates::new(n);
    let hom = bc == BoundaryCondition::Homogeneous && vertex.boundary;
    let kv = vertex.patches.len();
    if kv == 1 && !hom {
        return Ok(up.into_matrix());
    }
    // Per incident patch: global vertex DOF and weighted interior corrections γ⊗γ.
    let mut data = Vec::with_capacity(kv);
    for vp in &vertex.patches {
        let ps = &spaces.patches[vp.patch];
        let c = vp.corner.0;
        let dims = spaces.shape(0, vp.patch, 0);
        let g = [end_gamma(&ps.v0[0], r, c[0])?, end_gamma(&ps.v0[1], r, c[1])?];
        let at = |m: usize, a: usize| if c[a] { dims[a] - 1 - m } else { m };
        let dof = spaces.index(0, vp.patch, 0, [at(0, 0), at(0, 1)]);
        let mut corr = Vec::with_capacity(r * r);
        for m1 in 1..=r {
            for m2 in 1..=r {
                corr.push((spaces.index(0, vp.patch, 0, [at(m1, 0), at(m2, 1)]), g[0][m1 - 1] * g[1][m2 - 1]));
            }
        }
        data.push((dof, corr));
    }
    let inv_k = 1.0 / kv as f64;
    for (dof, corr) in &data {
        up.replace(*dof);
        if hom {
            for &(row, v) in corr {
                up.add(*dof, row, v);
            }
            continue;
        }
        for &(row, v) in corr {
            up.add(*dof, row, v);
        }
        for (other, ocorr) in &data {
            up.add(*dof, *other, inv_k);
            for &(row, v) in ocorr {
                up.add(*dof, row, -inv_k * v);
            }
        }
    }
    Ok(up.into_matrix())
}

/// Per-side data of an edge for one level: component, tensor shape, perpendicular γ, frame.
struct SideData {
    frame: SideFrame,
    comp: usize,
    shape: [usize; 2],
    gamma: Vec<f64>,
}

impl SideData {
    fn new(spaces: &DeRhamSpaces, frame: SideFrame, level: usize, r: usize) -> Result<Self> {
        let comp = if level == 1 { frame.parallel_axis } else { 0 };
        let perp = &spaces.patches[frame.patch].v0[frame.perpendicular_axis];
        Ok(Self {
            frame,
            comp,
            shape: spaces.shape(level, frame.patch, comp),
            gamma: end_gamma(perp, r, frame.side.at_far_end())?,
        })
    }

    fn dof(&self, spaces: &DeRhamSpaces, level: usize, j: usize, m: usize) -> usize {
        spaces.index(level, self.frame.patch, self.comp, self.frame.tensor_index(j, m, self.shape))
    }
}

/// Column of a projected basis function written as traces on both sides:
/// `coarse(j) ⊗ (½λ₀ + ½Σγ⁻λ_m)` on the coarse patch and `fine(l) ⊗ (½λ₀ − ½Σγ⁺λ_m)` on the
/// fine patch, where `s_coarse`, `s_fine` are ±½ factors applied to the correction sums.
#[allow(clippy::too_many_arguments)]
fn push_column(
    up: &mut ColumnUpdates,
    spaces: &DeRhamSpaces,
    level: usize,
    col: usize,
    minus: &SideData,
    coarse: &[f64],
    coarse_corr: &[f64],
    plus: &SideData,
    fine: &[f64],
    fine_corr: &[f64],
    sign_plus: f64,
) {
    up.replace(col);
    for (i, (&v, &w)) in coarse.iter().zip(coarse_corr).enumerate() {
        up.add(col, minus.dof(spaces, level, i, 0), 0.5 * v);
        for (m, g) in minus.gamma.iter().enumerate() {
            up.add(col, minus.dof(spaces, level, i, m + 1), 0.5 * g * w);
        }
    }
    for (l, (&v, &w)) in fine.iter().zip(fine_corr).enumerate() {
        up.add(col, plus.dof(spaces, level, l, 0), 0.5 * sign_plus * v);
        for (m, g) in plus.gamma.iter().enumerate() {
            up.add(col, plus.dof(spaces, level, l, m + 1), 0.5 * sign_plus * g * w);
        }
    }
}

fn boundary_edge_projection(spaces: &DeRhamSpaces, edge: &Edge, level: usize, r: usize) -> Result<SparseMatrix> {
    let side = SideData::new(spaces, boundary_frame(edge), level, r)?;
    let mut up = ColumnUpdates::new(spaces.dim(level));
    let par_dim = side.shape[side.frame.parallel_axis];
    let par_space = &spaces.patches[side.frame.patch].v0[side.frame.parallel_axis];
    for j in 0..par_dim {
        let col = side.dof(spaces, level, j, 0);
        up.replace(col);
        let vertex_end = level == 0 && (j == 0 || j == par_dim - 1);
        if vertex_end {
            let gpar = end_gamma(par_space, r, j != 0)?;
            for (m1, g1) in gpar.iter().enumerate() {
                let jj = if j == 0 { m1 + 1 } else { par_dim - 2 - m1 };
                for (m2, g2) in side.gamma.iter().enumerate() {
                    up.add(col, side.dof(spaces, level, jj, m2 + 1), g1 * g2);
                }
            }
        } else {
            for (m, g) in side.gamma.iter().enumerate() {
                up.add(col, side.dof(spaces, level, j, m + 1), *g);
            }
        }
    }
    Ok(up.into_matrix())
}

fn column(m: &DenseMatrix, j: usize) -> Vec<f64> {
    m.column(j)
}

fn mat_vec(m: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    m.mul_vec(v).expect("dimensions agree by construction")
}

/// Local edge projection on `V⁰_pw`.
pub fn edge_projection_v0(spaces: &DeRhamSpaces, edge: &Edge, r: usize, bc: BoundaryCondition) -> Result<SparseMatrix> {
    check_order(spaces, 0, r)?;
    if edge.is_boundary() {
        return match bc {
            BoundaryCondition::Homogeneous => boundary_edge_projection(spaces, edge, 0, r),
            BoundaryCondition::None => Err(Error::Usage(format!("edge {} is a boundary edge", edge.id))),
        };
    }
    let fr = edge_local_frame(edge)?;
    let ops = interface_operators(spaces, edge, r)?;
    let minus = SideData::new(spaces, fr.minus, 0, r)?;
    let plus = SideData::new(spaces, fr.plus, 0, r)?;
    let (e, rr) = (&ops.e0, &ops.r0);
    let er = e.matmul(rr)?;
    let nc = ops.coarse.dim() - 1;
    let nf = ops.fine.dim() - 1;
    let mut up = ColumnUpdates::new(spaces.dim(0));
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();

    for j in 1..nc {
        let unit: Vec<f64> = (0..=nc).map(|i| (i == j) as u8 as f64).collect();
        let ej = column(e, j);
        push_column(&mut up, spaces, 0, minus.dof(spaces, 0, j, 0), &minus, &unit, &unit, &plus, &ej, &neg(&ej), 1.0);
    }
    for j in 1..nf {
        let rj = column(rr, j);
        let erj = column(&er, j);
        push_column(&mut up, spaces, 0, plus.dof(spaces, 0, j, 0), &minus, &rj, &neg(&rj), &plus, &erj, &erj, 1.0);
    }
    for (jm, jp) in [(0, 0), (nc, nf)] {
        let at_end = jm != 0;
        let gpar = end_gamma(&ops.fine, r, at_end)?;
        let mut mu_plus = vec![0.0; nf + 1];
        for (m, g) in gpar.iter().enumerate() {
            mu_plus[if at_end { nf - 1 - m } else { m + 1 }] = *g;
        }
        let mut diff = mu_plus.clone();
        diff[jp] -= 1.0;
        let mut mu_minus = mat_vec(rr, &diff);
        mu_minus[jm] += 1.0;

        let unit: Vec<f64> = (0..=nc).map(|i| (i == jm) as u8 as f64).collect();
        let ej = column(e, jm);
        let e_mu = mat_vec(e, &mu_minus);
        push_column(&mut up, spaces, 0, minus.dof(spaces, 0, jm, 0), &minus, &unit, &mu_minus, &plus, &ej, &neg(&e_mu), 1.0);

        let rj = column(rr, jp);
        let r_mu = mat_vec(rr, &mu_plus);
        let erj = column(&er, jp);
        let er_mu = mat_vec(&er, &mu_plus);
        push_column(&mut up, spaces, 0, plus.dof(spaces, 0, jp, 0), &minus, &rj, &neg(&r_mu), &plus, &erj, &er_mu, 1.0);
    }
    Ok(up.into_matrix())
}

/// Local edge projection on `V¹_pw`; only the tangential component is modified.
pub fn edge_projection_v1(spaces: &DeRhamSpaces, edge: &Edge, r: usize, bc: BoundaryCondition) -> Result<SparseMatrix> {
    check_order(spaces, 1, r)?;
    if edge.is_boundary() {
        return match bc {
            BoundaryCondition::Homogeneous => boundary_edge_projection(spaces, edge, 1, r),
            BoundaryCondition::None => Err(Error::Usage(format!("edge {} is a boundary edge", edge.id))),
        };
    }
    let fr = edge_local_frame(edge)?;
    let ops = interface_operators(spaces, edge, r)?;
    let minus = SideData::new(spaces, fr.minus, 1, r)?;
    let plus = SideData::new(spaces, fr.plus, 1, r)?;
    // A reversed fine side sees the tangential direction flipped.
    let s = if edge.reversed { -1.0 } else { 1.0 };
    let (e, rr) = (&ops.e1, &ops.r1);
    let er = e.matmul(rr)?;
    let mut up = ColumnUpdates::new(spaces.dim(1));
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    for j in 0..e.ncols() {
        let unit: Vec<f64> = (0..e.ncols()).map(|i| (i == j) as u8 as f64).collect();
        let ej = column(e, j);
        push_column(&mut up, spaces, 1, minus.dof(spaces, 1, j, 0), &minus, &unit, &unit, &plus, &ej, &neg(&ej), s);
    }
    for j in 0..e.nrows() {
        let rj: Vec<f64> = column(rr, j).iter().map(|x| s * x).collect();
        let erj = column(&er, j);
        push_column(&mut up, spaces, 1, plus.dof(spaces, 1, j, 0), &minus, &rj, &neg(&rj), &plus, &erj, &erj, 1.0);
    }
    Ok(up.into_matrix())
}

/// The assembled conforming projection of one level.
#[derive(Debug, Clone)]
pub struct ConformingProjection {
    pub level: usize,
    pub order: usize,
    pub bc: BoundaryCondition,
    pub matrix: SparseMatrix,
}

pub fn assemble_p(spaces: &DeRhamSpaces, level: usize, r: usize, bc: BoundaryCondition) -> Result<ConformingProjection> {
    assemble_p_ordered(spaces, level, r, bc, FactorOrder::Canonical)
}

/// Product of the local projections in the requested order; the first factor acts first.
pub fn assemble_p_ordered(
    spaces: &DeRhamSpaces,
    level: usize,
    r: usize,
    bc: BoundaryCondition,
    order: FactorOrder,
) -> Result<ConformingProjection> {
    if level > 1 {
        return Err(param("conforming projections exist for levels 0 and 1"));
    }
    check_order(spaces, level, r)?;
    let topo = &spaces.topology;
    let hom = bc == BoundaryCondition::Homogeneous;
    let mut factors: Vec<SparseMatrix> = Vec::new();
    if level == 0 {
        let mut vf = topo
            .vertices
            .iter()
            .filter(|v| v.patches.len() > 1 || (hom && v.boundary))
            .map(|v| vertex_projection(spaces, v, r, bc))
            .collect::<Result<Vec<_>>>()?;
        if order == FactorOrder::Reversed {
            vf.reverse();
        }
        factors.extend(vf);
    }
    let mut ef = topo
        .edges
        .iter()
        .filter(|e| hom || !e.is_boundary())
        .map(|e| if level == 0 { edge_projection_v0(spaces, e, r, bc) } else { edge_projection_v1(spaces, e, r, bc) })
        .collect::<Result<Vec<_>>>()?;
    if order == FactorOrder::Reversed {
        ef.reverse();
    }
    factors.extend(ef);
    let mut p = SparseMatrix::identity(spaces.dim(level));
    for f in &factors {
        p = f.matmul(&p)?;
    }
    Ok(ConformingProjection { level, order: r, bc, matrix: p.pruned(0.0) })
}
