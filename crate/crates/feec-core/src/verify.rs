//! Measured properties of conforming projections.
//!
//! Each function returns the worst defect it finds, so callers can compare
//! against their own tolerances. [`projection_suite`] bundles all of them with
//! the default tolerances used by the command-line checker.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conforming::{assemble_p, assemble_p_ordered, BoundaryCondition, FactorOrder};
use crate::derham::{curl_matrix, gradient_matrix, DeRhamSpaces, FemField, FieldValue, PatchSpaces};
use crate::geometry::{PatchMapping, SideRef};
use crate::linalg::SparseMatrix;
use crate::splines::{bernstein_basis, QuadratureRule, UnivariateSpace};
use crate::Result;

/// One measured property and the bound it is held to.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub level: usize,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// `max |ℙℙ − ℙ|`.
pub fn idempotence_defect(p: &SparseMatrix) -> Result<f64> {
    p.matmul(p)?.max_abs_diff(p)
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Value (level 0) or tangential component (level 1) of `field` on `side` at parameter `t`.
fn trace(field: &FemField, side: SideRef, t: f64) -> Result<f64> {
    let u = side.side.point(t);
    let value = field.eval_patch(side.patch, u[0], u[1])?;
    Ok(match value {
        FieldValue::Scalar(v) => v,
        FieldValue::Vector(v) => {
            let jac = field.spaces.topology.patches[side.patch].mapping.jacobian(u[0], u[1]);
            let a = side.side.parallel_axis();
            let tau = [jac[0][a], jac[1][a]];
            (v[0] * tau[0] + v[1] * tau[1]) / tau[0].hypot(tau[1])
        }
    })
}

/// Largest trace mismatch of `ℙc` across interior edges for a random `c`, sampled at
/// `samples` points per edge. With homogeneous conditions the boundary traces count too.
pub fn interface_jump(
    spaces: &alloc::sync::Arc<DeRhamSpaces>,
    level: usize,
    p: &SparseMatrix,
    bc: BoundaryCondition,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let c = p.mul_vec(&random_vector(spaces.dim(level), seed))?;
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let field = FemField::new(spaces.clone(), level, c)?;
    let mut worst = 0.0f64;
    for e in &spaces.topology.edges {
        for i in 0..samples {
            let t = i as f64 / (samples.max(2) - 1) as f64;
            let a = trace(&field, e.minus, t)?;
            let b = match e.plus {
                Some(plus) => trace(&field, plus, if e.reversed { 1.0 - t } else { t })?,
                None if bc == BoundaryCondition::Homogeneous => 0.0,
                None => a,
            };
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst / scale)
}

/// `max |ℙ_r c − c|` for `c` in the range of a projection of a different order, which
/// spans the same conforming space.
pub fn reproduction_defect(spaces: &DeRhamSpaces, level: usize, r: usize, bc: BoundaryCondition, seed: u64) -> Result<f64> {
    let other = if r == 0 { 1 } else { 0 };
    let q = assemble_p(spaces, level, other, bc)?.matrix;
    let p = assemble_p(spaces, level, r, bc)?.matrix;
    let c = q.mul_vec(&random_vector(spaces.dim(level), seed))?;
    let pc = p.mul_vec(&c)?;
    Ok(pc.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Difference between the canonical and the reversed product of local projections.
pub fn factor_order_defect(spaces: &DeRhamSpaces, level: usize, r: usize, bc: BoundaryCondition) -> Result<f64> {
    let a = assemble_p_ordered(spaces, level, r, bc, FactorOrder::Canonical)?.matrix;
    let b = assemble_p_ordered(spaces, level, r, bc, FactorOrder::Reversed)?.matrix;
    a.max_abs_diff(&b)
}

/// Difference after replacing every patch mapping by an unrelated curved map.
pub fn metric_dependence(spaces: &DeRhamSpaces, level: usize, r: usize, bc: BoundaryCondition) -> Result<f64> {
    let warped: Vec<PatchMapping> = (0..spaces.num_patches())
        .map(|k| PatchMapping::Polar {
            center: [k as f64, -1.0],
            r_inner: 0.5,
            r_outer: 1.7,
            angle_start: 0.1,
            angle_end: 1.3,
        })
        .collect();
    let other = DeRhamSpaces::new(spaces.topology.with_mappings(warped)?)?;
    let a = assemble_p(spaces, level, r, bc)?.matrix;
    let b = assemble_p(&other, level, r, bc)?.matrix;
    a.max_abs_diff(&b)
}

/// Number of non-identity rows of `ℙ` whose DOF lies at perpendicular index distance
/// greater than `r` from every constrained side of its patch.
pub fn locality_violations(spaces: &DeRhamSpaces, level: usize, p: &SparseMatrix, r: usize, bc: BoundaryCondition) -> usize {
    let topo = &spaces.topology;
    let mut count = 0;
    for g in 0..spaces.dim(level) {
        let (cols, vals) = p.row(g);
        if cols.len() == 1 && cols[0] == g && vals[0] == 1.0 {
            continue;
        }
        let (k, d, idx) = spaces.locate_dof(level, g);
        let shape = spaces.shape(level, k, d);
        let near = crate::geometry::Side::ALL.iter().any(|&side| {
            let edge = topo.edge_of(k, side);
            if edge.is_boundary() && bc == BoundaryCondition::None {
                return false;
            }
            let a = side.perpendicular_axis();
            let dist = if side.at_far_end() { shape[a] - 1 - idx[a] } else { idx[a] };
            dist <= r
        });
        if !near {
            count += 1;
        }
    }
    count
}

/// `∫ λᵢ qⱼ` of every basis function of `space` against the order-`r` Bernstein polynomials.
fn moments_1d(space: &UnivariateSpace, r: usize) -> Result<Vec<Vec<f64>>> {
    let rule = QuadratureRule::on_breakpoints(&space.knot_vector().breakpoints(), space.degree() + r + 2);
    let mut out = vec![vec![0.0; r]; space.dim()];
    for (&x, &w) in rule.points.iter().zip(&rule.weights) {
        let q = bernstein_basis(r, x);
        for (i, v) in space.eval_basis(x)?.iter() {
            for j in 0..r {
                out[i][j] += w * v * q[j];
            }
        }
    }
    Ok(out)
}

/// Largest patch moment of `ℙΛ − Λ` against tensor Bernstein polynomials of order `r`, over
/// every basis function `Λ` whose column of `ℙ` is not a unit column.
pub fn moment_defect(spaces: &DeRhamSpaces, level: usize, p: &SparseMatrix, r: usize) -> Result<f64> {
    if r == 0 {
        return Ok(0.0);
    }
    let mut tables = Vec::new();
    for k in 0..spaces.num_patches() {
        for d in 0..PatchSpaces::num_components(level) {
            let (a, b) = spaces.patches[k].factors(level, d);
            tables.push((moments_1d(a, r)?, moments_1d(b, r)?));
        }
    }
    let pt = p.transpose();
    let mut worst = 0.0f64;
    let mut acc = vec![0.0; tables.len() * r * r];
    for col in 0..spaces.dim(level) {
        let (rows, vals) = pt.row(col);
        if rows.len() == 1 && rows[0] == col && vals[0] == 1.0 {
            continue;
        }
        acc.iter_mut().for_each(|v| *v = 0.0);
        let mut add = |g: usize, x: f64| {
            let (k, d, idx) = spaces.locate_dof(level, g);
            let t = k * PatchSpaces::num_components(level) + d;
            let (ma, mb) = &tables[t];
            for j1 in 0..r {
                for j2 in 0..r {
                    acc[(t * r + j1) * r + j2] += x * ma[idx[0]][j1] * mb[idx[1]][j2];
                }
            }
        };
        for (&i, &x) in rows.iter().zip(vals) {
            add(i, x);
        }
        add(col, -1.0);
        worst = acc.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    Ok(worst)
}

/// `(max |𝓒𝔾|, max |𝓒ℙ¹𝔾ℙ⁰|)`.
pub fn complex_defect(spaces: &DeRhamSpaces, r: usize, bc: BoundaryCondition) -> Result<(f64, f64)> {
    let g = gradient_matrix(spaces)?;
    let c = curl_matrix(spaces)?;
    let cg = c.matmul(&g)?.max_abs();
    let p0 = assemble_p(spaces, 0, r, bc)?.matrix;
    let p1 = assemble_p(spaces, 1, r.min(spaces.degree()), bc)?.matrix;
    let cpgp = c.matmul(&p1)?.matmul(&g)?.matmul(&p0)?.max_abs();
    Ok((cg, cpgp))
}

/// Every projection property for one order and boundary condition.
pub fn projection_suite(
    spaces: &alloc::sync::Arc<DeRhamSpaces>,
    r: usize,
    bc: BoundaryCondition,
    seed: u64,
) -> Result<Vec<Check>> {
    projection_suite_with(spaces, r, bc, seed, None)
}

/// Hook that replaces the assembled projection of a level before it is checked.
pub type Tamper<'a> = &'a dyn Fn(usize, SparseMatrix) -> SparseMatrix;

/// [`projection_suite`] with the matrices under test passed through `tamper`, which lets
/// callers confirm that a damaged projection is caught. The comparisons against
/// independently assembled projections (reproduction, factor order, metric) are unaffected.
pub fn projection_suite_with(
    spaces: &alloc::sync::Arc<DeRhamSpaces>,
    r: usize,
    bc: BoundaryCondition,
    seed: u64,
    tamper: Option<Tamper<'_>>,
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let (cg, cpgp) = complex_defect(spaces, r, bc)?;
    out.push(Check { name: "complex CG", level: 1, value: cg, tolerance: 0.0 });
    out.push(Check { name: "complex CPGP", level: 1, value: cpgp, tolerance: 1e-12 });
    for level in 0..2 {
        let rl = if level == 1 { r.min(spaces.degree()) } else { r };
        let mut p = assemble_p(spaces, level, rl, bc)?.matrix;
        if let Some(f) = tamper {
            p = f(level, p);
        }
        out.push(Check { name: "idempotence", level, value: idempotence_defect(&p)?, tolerance: 1e-11 });
        out.push(Check { name: "conformity", level, value: interface_jump(spaces, level, &p, bc, 100, seed)?, tolerance: 1e-10 });
        out.push(Check { name: "reproduction", level, value: reproduction_defect(spaces, level, rl, bc, seed)?, tolerance: 1e-11 });
        out.push(Check { name: "factor order", level, value: factor_order_defect(spaces, level, rl, bc)?, tolerance: 1e-12 });
        out.push(Check { name: "metric independence", level, value: metric_dependence(spaces, level, rl, bc)?, tolerance: 0.0 });
        out.push(Check {
            name: "locality",
            level,
            value: locality_violations(spaces, level, &p, rl, bc) as f64,
            tolerance: 0.0,
        });
        out.push(Check { name: "moments", level, value: moment_defect(spaces, level, &p, rl)?, tolerance: 1e-11 });
    }
    Ok(out)
}
