use std::sync::Arc;

use feec_core::conforming::*;
use feec_core::derham::*;
use feec_core::geometry::*;
use feec_core::linalg::sparse::{dot, norm2};
use feec_core::linalg::SparseMatrix;
use feec_core::operators::*;
use feec_core::splines::*;
use proptest::prelude::*;

const NONE: BoundaryCondition = BoundaryCondition::None;
const HOM: BoundaryCondition = BoundaryCondition::Homogeneous;

fn square(refined: Vec<u32>, cells: usize, p: usize) -> Arc<DeRhamSpaces> {
    let params = PresetParams { cells, refinement: Refinement::Explicit(refined), ..Default::default() };
    Arc::new(DeRhamSpaces::new(preset_domain("unit-square-grid", &params).unwrap().build(p).unwrap()).unwrap())
}

/// Two unit squares side by side; the right one has both parameter axes flipped.
fn flipped_pair(p: usize) -> Arc<DeRhamSpaces> {
    let spec = DomainSpec {
        name: "flipped".into(),
        patches: vec![
            PatchSpec { mapping: PatchMapping::rectangle(0.0, 0.0, 1.0, 1.0), cells: [3; 2] },
            PatchSpec { mapping: PatchMapping::Affine { origin: [2.0, 1.0], matrix: [[-1.0, 0.0], [0.0, -1.0]] }, cells: [6; 2] },
        ],
    };
    Arc::new(DeRhamSpaces::new(spec.build(p).unwrap()).unwrap())
}

fn pseudo_random(n: usize, seed: usize) -> Vec<f64> {
    (0..n).map(|i| (((i + 3) * 7919 + seed * 104729) % 211) as f64 / 105.0 - 1.0).collect()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&d) / norm2(b).max(1e-300)
}

#[test]
fn zero_maps_to_zero() {
    let s = square(vec![1, 0, 0, 0], 3, 2);
    let d = WeakOperator::div(&s, 3, HOM).unwrap();
    assert!(d.apply(&vec![0.0; s.dim(1)]).unwrap().iter().all(|&v| v == 0.0));
    let c = WeakOperator::curl(&s, 2, HOM).unwrap();
    assert!(c.apply(&vec![0.0; s.dim(2)]).unwrap().iter().all(|&v| v == 0.0));
    let f = filtered_projection_scalar(&s, 0, 3, NONE, &|_| 0.0).unwrap();
    assert!(f.coeffs.iter().all(|&v| v == 0.0));
}

#[test]
fn weak_operators_solve_the_defining_mass_systems() {
    let s = flipped_pair(3);
    for bc in [NONE, HOM] {
        let cx = DiscreteComplex::assemble(&s, 4, bc).unwrap();
        for kind in [WeakKind::Div, WeakKind::Curl] {
            let op = WeakOperator::from_complex(&cx, kind).unwrap();
            let u = pseudo_random(s.dim(op.source_level()), 1);
            let out = op.apply(&u).unwrap();
            let lhs = cx.mass[op.target_level()].mul_vec(&out).unwrap();
            let rhs = op.rhs_matrix().mul_vec(&u).unwrap();
            assert!(rel_diff(&lhs, &rhs) < 1e-11, "{kind:?} {bc:?}");
        }
    }
}

#[test]
fn weak_divergence_of_a_gradient_is_the_stiffness_action() {
    // Broken stiffness matrix assembled from 1D quadrature on axis-aligned rectangles.
    let s = square(vec![1, 0, 0, 0], 3, 3);
    let mut blocks = Vec::new();
    for k in 0..s.num_patches() {
        let jac = s.topology.patches[k].mapping.jacobian(0.5, 0.5);
        let (a, b) = (jac[0][0], jac[1][1]);
        let (sx, sy) = (&s.patches[k].v0[0], &s.patches[k].v0[1]);
        let (kx, mx) = stiffness_and_mass_1d(sx);
        let (ky, my) = stiffness_and_mass_1d(sy);
        let n2 = sy.dim();
        let n = sx.dim() * n2;
        let mut dense = feec_core::linalg::DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (i1, i2, j1, j2) = (i / n2, i % n2, j / n2, j % n2);
                dense[(i, j)] = b / a * kx[i1][j1] * my[i2][j2] + a / b * mx[i1][j1] * ky[i2][j2];
            }
        }
        blocks.push(SparseMatrix::from_dense(&dense));
    }
    let stiffness = SparseMatrix::block_diag(&blocks);
    let cx = DiscreteComplex::assemble(&s, 4, HOM).unwrap();
    let div = WeakOperator::from_complex(&cx, WeakKind::Div).unwrap();
    let phi = pseudo_random(s.dim(0), 5);
    let u = cx.grad_conforming().unwrap().mul_vec(&phi).unwrap();
    let lap = div.apply(&u).unwrap();
    let lhs = cx.mass[0].mul_vec(&lap).unwrap();
    let k_phi = stiffness.mul_vec(&cx.p0.mul_vec(&phi).unwrap()).unwrap();
    let rhs: Vec<f64> = cx.p0.mul_vec_transpose(&k_phi).unwrap().iter().map(|v| -v).collect();
    assert!(rel_diff(&lhs, &rhs) < 1e-10, "{}", rel_diff(&lhs, &rhs));
}

fn stiffness_and_mass_1d(space: &UnivariateSpace) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = space.dim();
    let d = space.derived().unwrap();
    let rule = QuadratureRule::on_breakpoints(&space.knot_vector().breakpoints(), space.degree() + 2);
    let unit = |i: usize| -> Vec<f64> { (0..n).map(|k| (k == i) as u8 as f64).collect() };
    let dcoef: Vec<Vec<f64>> = (0..n).map(|i| derivative_coeffs(space, &unit(i)).unwrap()).collect();
    let mut k = vec![vec![0.0; n]; n];
    let mut m = vec![vec![0.0; n]; n];
    for (&x, &w) in rule.points.iter().zip(&rule.weights) {
        let vals: Vec<f64> = (0..n).map(|i| space.eval(&unit(i), x).unwrap()).collect();
        let ders: Vec<f64> = (0..n).map(|i| d.eval(&dcoef[i], x).unwrap()).collect();
        for i in 0..n {
            for j in 0..n {
                k[i][j] += w * ders[i] * ders[j];
                m[i][j] += w * vals[i] * vals[j];
            }
        }
    }
    (k, m)
}

// Polynomial fields keep every quadrature exact on affine patches, so the
// commuting relations below hold to rounding.
fn bubble(x: [f64; 2]) -> f64 {
    x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]) * (1.0 + x[0] - 0.5 * x[1])
}

fn bubble_rot_grad(x: [f64; 2]) -> [f64; 2] {
    let (a, b) = (x[0], x[1]);
    let (f, g, h) = (a * (1.0 - a), b * (1.0 - b), 1.0 + a - 0.5 * b);
    let (fa, gb) = (1.0 - 2.0 * a, 1.0 - 2.0 * b);
    let dx = fa * g * h + f * g;
    let dy = f * gb * h - 0.5 * f * g;
    [dy, -dx]
}

#[test]
fn weak_curl_commutes_with_filtered_projections() {
    // v vanishes on ∂Ω, so the variant without boundary conditions applies.
    let s = square(vec![1, 0, 0, 1], 3, 3);
    let w = filtered_projection_scalar(&s, 2, 0, NONE, &bubble).unwrap();
    for r in [0, 2, 3] {
        let op = WeakOperator::curl(&s, r, NONE).unwrap();
        let lhs = op.apply(&w.coeffs).unwrap();
        let rhs = filtered_projection_vector(&s, r, NONE, &bubble_rot_grad).unwrap().coeffs;
        assert!(rel_diff(&lhs, &rhs) < 1e-9, "r={r}: {}", rel_diff(&lhs, &rhs));
        // The opposite sign convention breaks the relation.
        let flipped: Vec<f64> = lhs.iter().map(|v| -v).collect();
        assert!(rel_diff(&flipped, &rhs) > 1.0);
    }
}

#[test]
fn homogeneous_variants_commute_for_fields_without_boundary_conditions() {
    let s = flipped_pair(3);
    let u = |x: [f64; 2]| [x[0] * x[0] * x[1] - x[1], 1.0 + x[0] * x[1] * x[1]];
    let div_u = |x: [f64; 2]| 2.0 * x[0] * x[1] + 2.0 * x[0] * x[1];
    for r in [0, 1, 3] {
        let op = WeakOperator::div(&s, r, HOM).unwrap();
        let pu = filtered_projection_vector(&s, r, HOM, &u).unwrap();
        let lhs = op.apply(&pu.coeffs).unwrap();
        let rhs = filtered_projection_scalar(&s, 0, r, HOM, &div_u).unwrap().coeffs;
        assert!(rel_diff(&lhs, &rhs) < 1e-9, "div r={r}: {}", rel_diff(&lhs, &rhs));
    }
    let f = |x: [f64; 2]| x[0] * x[0] - x[0] * x[1] + 2.0;
    let rot_grad_f = |x: [f64; 2]| [-x[0], -(2.0 * x[0] - x[1])];
    for r in [0, 3] {
        let op = WeakOperator::curl(&s, r, HOM).unwrap();
        let pf = filtered_projection_scalar(&s, 2, r, HOM, &f).unwrap();
        let lhs = op.apply(&pf.coeffs).unwrap();
        let rhs = filtered_projection_vector(&s, r, HOM, &rot_grad_f).unwrap().coeffs;
        assert!(rel_diff(&lhs, &rhs) < 1e-9, "curl r={r}: {}", rel_diff(&lhs, &rhs));
    }
}

#[test]
fn weak_divergence_commutes_on_fields_with_vanishing_normal_trace() {
    let s = square(vec![0, 1, 0, 0], 3, 2);
    let u = |x: [f64; 2]| [x[0] * (1.0 - x[0]) * x[1], x[1] * (1.0 - x[1]) * x[0] * x[0]];
    let div_u = |x: [f64; 2]| (1.0 - 2.0 * x[0]) * x[1] + (1.0 - 2.0 * x[1]) * x[0] * x[0];
    for r in [0, 2, 3] {
        let op = WeakOperator::div(&s, r, NONE).unwrap();
        let pu = filtered_projection_vector(&s, r, NONE, &u).unwrap();
        let lhs = op.apply(&pu.coeffs).unwrap();
        let rhs = filtered_projection_scalar(&s, 0, r, NONE, &div_u).unwrap().coeffs;
        assert!(rel_diff(&lhs, &rhs) < 1e-9, "r={r}: {}", rel_diff(&lhs, &rhs));
    }
}

#[test]
fn filtered_projection_reproduces_broken_polynomials() {
    for p in 2..=3 {
        let s = flipped_pair(p);
        let topo = s.topology.clone();
        // A different polynomial of degree p on each patch.
        let f = move |x: [f64; 2]| {
            let (k, _) = topo.locate(x).unwrap();
            let c = 1.0 + k as f64;
            c * x[0].powi(p as i32) - x[1].powi(p as i32 - 1) * x[0] + c * c * x[1]
        };
        let filtered = filtered_projection_scalar(&s, 0, p + 1, NONE, &f).unwrap();
        let exact = l2_project_scalar(&s, 0, &f).unwrap();
        assert!(rel_diff(&filtered.coeffs, &exact.coeffs) < 1e-10, "p={p}");
        // Without moment preservation the broken polynomial is not reproduced.
        let crude = filtered_projection_scalar(&s, 0, 0, NONE, &f).unwrap();
        assert!(rel_diff(&crude.coeffs, &exact.coeffs) > 1e-4);
    }
}

#[test]
fn filtered_projection_reproduces_global_polynomials_on_refined_grid() {
    let s = square(vec![1, 0, 0, 0], 3, 3);
    let f = |x: [f64; 2]| x[0].powi(3) - 2.0 * x[0] * x[1] * x[1] + 0.5;
    let filtered = filtered_projection_scalar(&s, 0, 4, HOM, &f).unwrap();
    let exact = l2_project_scalar(&s, 0, &f).unwrap();
    assert!(rel_diff(&filtered.coeffs, &exact.coeffs) < 1e-10);
}

#[test]
fn jump_stabilization_is_symmetric_with_conforming_kernel() {
    let s = flipped_pair(3);
    for bc in [NONE, HOM] {
        let cx = DiscreteComplex::assemble(&s, 4, bc).unwrap();
        for level in 0..=1 {
            let st = cx.jump_stabilization(level).unwrap();
            assert!(st.symmetry_defect() <= 1e-14 * st.max_abs().max(1.0));
            let p = cx.projection(level).unwrap();
            let c = pseudo_random(s.dim(level), 11);
            let pc = p.mul_vec(&c).unwrap();
            assert!(norm2(&st.mul_vec(&pc).unwrap()) <= 1e-11 * norm2(&pc));
            // cᵀSc = ‖(I − ℙ)c‖²_M
            let jump: Vec<f64> = c.iter().zip(&pc).map(|(a, b)| a - b).collect();
            let direct = dot(&jump, &cx.mass[level].mul_vec(&jump).unwrap());
            let form = dot(&c, &st.mul_vec(&c).unwrap());
            assert!(direct > 0.0 && (form - direct).abs() <= 1e-12 * direct.max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn duality_identities(seed_u in 0usize..1000, seed_v in 0usize..1000, r in 0usize..4, hom in any::<bool>()) {
        let s = flipped_pair(2);
        let bc = if hom { HOM } else { NONE };
        let cx = DiscreteComplex::assemble(&s, r, bc).unwrap();
        // ⟨φ, D̃u⟩ = −⟨grad ℙ⁰φ, u⟩
        let div = WeakOperator::from_complex(&cx, WeakKind::Div).unwrap();
        let u = pseudo_random(s.dim(1), seed_u);
        let phi = pseudo_random(s.dim(0), seed_v);
        let lhs = dot(&phi, &cx.mass[0].mul_vec(&div.apply(&u).unwrap()).unwrap());
        let gphi = cx.grad_conforming().unwrap().mul_vec(&phi).unwrap();
        let rhs = -dot(&gphi, &cx.mass[1].mul_vec(&u).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        // ⟨v, C̃w⟩ = ⟨curl ℙ¹v, w⟩
        let curl = WeakOperator::from_complex(&cx, WeakKind::Curl).unwrap();
        let w = pseudo_random(s.dim(2), seed_u + 1);
        let v = pseudo_random(s.dim(1), seed_v + 1);
        let lhs = dot(&v, &cx.mass[1].mul_vec(&curl.apply(&w).unwrap()).unwrap());
        let cv = cx.curl_conforming().unwrap().mul_vec(&v).unwrap();
        let rhs = dot(&cv, &cx.mass[2].mul_vec(&w).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }
}
