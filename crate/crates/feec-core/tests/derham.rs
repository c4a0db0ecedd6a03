use std::sync::Arc;

use feec_core::derham::*;
use feec_core::geometry::*;
use feec_core::linalg::DenseMatrix;
use proptest::prelude::*;

fn spaces(name: &str, params: PresetParams, p: usize) -> Arc<DeRhamSpaces> {
    Arc::new(DeRhamSpaces::new(preset_domain(name, &params).unwrap().build(p).unwrap()).unwrap())
}

fn curved(p: usize) -> Arc<DeRhamSpaces> {
    spaces("curved-L-shape", PresetParams { cells: 3, level: 1, ..Default::default() }, p)
}

fn pseudo_random(n: usize, seed: usize) -> Vec<f64> {
    (0..n).map(|i| (((i + seed) * 2654435761) % 1000) as f64 / 500.0 - 1.0).collect()
}

fn scalar(v: FieldValue) -> f64 {
    match v {
        FieldValue::Scalar(x) => x,
        FieldValue::Vector(_) => panic!("expected a scalar"),
    }
}

fn vector(v: FieldValue) -> [f64; 2] {
    match v {
        FieldValue::Vector(x) => x,
        FieldValue::Scalar(_) => panic!("expected a vector"),
    }
}

#[test]
fn dimensions_follow_the_tensor_structure() {
    let s = spaces("unit-square-grid", PresetParams { refinement: Refinement::Explicit(vec![1, 0, 0, 0]), cells: 3, ..Default::default() }, 3);
    // Patch 0 has 6 cells, the others 3; V⁰ = n², V¹ = 2 n (n−1), V² = (n−1)².
    let n = |c: usize| c + 3;
    let d0: usize = [6, 3, 3, 3].iter().map(|&c| n(c) * n(c)).sum();
    let d1: usize = [6, 3, 3, 3].iter().map(|&c| 2 * n(c) * (n(c) - 1)).sum();
    let d2: usize = [6, 3, 3, 3].iter().map(|&c| (n(c) - 1) * (n(c) - 1)).sum();
    assert_eq!([s.dim(0), s.dim(1), s.dim(2)], [d0, d1, d2]);
    for level in 0..3 {
        for g in (0..s.dim(level)).step_by(7) {
            let (k, d, idx) = s.locate_dof(level, g);
            assert_eq!(s.index(level, k, d, idx), g);
            assert!(s.patch_range(level, k).contains(&g));
        }
    }
    assert_eq!(s.component_offset(1, 1, 1) - s.component_offset(1, 1, 0), n(3) * (n(3) - 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gradient_matrix_differentiates_fields(seed in 0usize..1000, s in 0.05f64..0.95, t in 0.05f64..0.95) {
        let sp = curved(3);
        let phi = FemField::new(sp.clone(), 0, pseudo_random(sp.dim(0), seed)).unwrap();
        let g = gradient_matrix(&sp).unwrap();
        let grad = FemField::new(sp.clone(), 1, g.mul_vec(&phi.coeffs).unwrap()).unwrap();
        let h = 1e-6;
        for k in 0..sp.num_patches() {
            let m = &sp.topology.patches[k].mapping;
            let x = m.map(s, t);
            let gv = vector(grad.eval_patch(k, s, t).unwrap());
            for (d, e) in [[h, 0.0], [0.0, h]].iter().enumerate() {
                let up = m.inverse([x[0] + e[0], x[1] + e[1]]).unwrap();
                let dn = m.inverse([x[0] - e[0], x[1] - e[1]]).unwrap();
                let fd = (scalar(phi.eval_patch(k, up[0], up[1]).unwrap()) - scalar(phi.eval_patch(k, dn[0], dn[1]).unwrap())) / (2.0 * h);
                prop_assert!((gv[d] - fd).abs() < 1e-5 * (1.0 + fd.abs()), "patch {} dir {}: {} vs {}", k, d, gv[d], fd);
            }
        }
    }

    #[test]
    fn curl_matrix_differentiates_fields(seed in 0usize..1000, s in 0.05f64..0.95, t in 0.05f64..0.95) {
        let sp = curved(3);
        let u = FemField::new(sp.clone(), 1, pseudo_random(sp.dim(1), seed)).unwrap();
        let c = curl_matrix(&sp).unwrap();
        let w = FemField::new(sp.clone(), 2, c.mul_vec(&u.coeffs).unwrap()).unwrap();
        let h = 1e-6;
        for k in 0..sp.num_patches() {
            let m = &sp.topology.patches[k].mapping;
            let x = m.map(s, t);
            let at = |dx: f64, dy: f64| {
                let q = m.inverse([x[0] + dx, x[1] + dy]).unwrap();
                vector(u.eval_patch(k, q[0], q[1]).unwrap())
            };
            let d1u2 = (at(h, 0.0)[1] - at(-h, 0.0)[1]) / (2.0 * h);
            let d2u1 = (at(0.0, h)[0] - at(0.0, -h)[0]) / (2.0 * h);
            let wv = scalar(w.eval_patch(k, s, t).unwrap());
            prop_assert!((wv - (d1u2 - d2u1)).abs() < 1e-5 * (1.0 + wv.abs()), "patch {}: {} vs {}", k, wv, d1u2 - d2u1);
        }
    }
}

#[test]
fn mass_matrices_are_symmetric_positive_and_integrate_constants() {
    let sp = curved(2);
    let area = 0.75 * std::f64::consts::PI * 0.75;
    for level in 0..3 {
        let m = mass_matrix(&sp, level).unwrap();
        assert!(m.symmetry_defect() < 1e-14 * m.max_abs());
        let dense: DenseMatrix = m.to_dense();
        assert!(dense.cholesky().is_ok(), "level {level}");
    }
    // The clamped basis sums to one, so 1ᵀ M⁰ 1 is the area.
    let m0 = mass_matrix(&sp, 0).unwrap();
    let ones = vec![1.0; sp.dim(0)];
    let a: f64 = m0.mul_vec(&ones).unwrap().iter().sum();
    assert!((a - area).abs() < 1e-12);
}

#[test]
fn l2_projections_reproduce_polynomials() {
    let sp = spaces("three-patch", PresetParams { cells: 3, refinement: Refinement::Explicit(vec![1, 0, 0]), ..Default::default() }, 3);
    let f0 = |x: [f64; 2]| x[0].powi(3) - 2.0 * x[0] * x[1] * x[1] + 0.5;
    assert!(l2_project_scalar(&sp, 0, &f0).unwrap().l2_error_scalar(&f0).unwrap() < 1e-12);
    let f1 = |x: [f64; 2]| [x[0] * x[1] - 1.0, x[1] * x[1] + 2.0 * x[0]];
    assert!(l2_project_vector(&sp, &f1).unwrap().l2_error_vector(&f1).unwrap() < 1e-12);
    let f2 = |x: [f64; 2]| x[0] * x[0] - x[1] + 3.0;
    assert!(l2_project_scalar(&sp, 2, &f2).unwrap().l2_error_scalar(&f2).unwrap() < 1e-12);
    // A degree-p polynomial is out of reach for V¹ with its degree p−1 components.
    let cubic = |x: [f64; 2]| [x[1].powi(3), 0.0];
    assert!(l2_project_vector(&sp, &cubic).unwrap().l2_error_vector(&cubic).unwrap() > 1e-6);
}

#[test]
fn mass_solver_inverts_the_mass_matrix() {
    let sp = curved(3);
    for level in 0..3 {
        let m = mass_matrix(&sp, level).unwrap();
        let x = pseudo_random(sp.dim(level), level);
        let y = MassSolver::new(&sp, level).unwrap().solve(&m.mul_vec(&x).unwrap()).unwrap();
        let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "level {level}: {err}");
    }
}

#[test]
fn field_evaluation_is_consistent() {
    let sp = curved(2);
    let f = FemField::new(sp.clone(), 0, pseudo_random(sp.dim(0), 3)).unwrap();
    let x = sp.topology.patches[1].mapping.map(0.3, 0.6);
    assert!((scalar(f.eval_physical(x).unwrap()) - scalar(f.eval_patch(1, 0.3, 0.6).unwrap())).abs() < 1e-10);
    assert!(FemField::new(sp.clone(), 0, vec![0.0; 3]).is_err());
    assert!(FemField::new(sp.clone(), 3, vec![]).is_err());
    assert_eq!(FemField::zeros(sp.clone(), 2).l2_norm().unwrap(), 0.0);
    assert!(f.l2_error_vector(&|_| [0.0, 0.0]).is_err());
}
