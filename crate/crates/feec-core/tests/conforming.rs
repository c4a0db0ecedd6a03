use std::sync::Arc;

use feec_core::conforming::*;
use feec_core::derham::*;
use feec_core::geometry::*;
use feec_core::linalg::SparseMatrix;
use feec_core::splines::*;

fn spaces_of(spec: &DomainSpec, p: usize) -> Arc<DeRhamSpaces> {
    Arc::new(DeRhamSpaces::new(spec.build(p).unwrap()).unwrap())
}

fn preset(name: &str, params: PresetParams) -> DomainSpec {
    preset_domain(name, &params).unwrap()
}

/// Two unit squares side by side, the right one parametrized with both axes flipped.
fn flipped_pair(cells_left: usize, cells_right: usize) -> DomainSpec {
    DomainSpec {
        name: "flipped".into(),
        patches: vec![
            PatchSpec { mapping: PatchMapping::rectangle(0.0, 0.0, 1.0, 1.0), cells: [cells_left; 2] },
            PatchSpec {
                mapping: PatchMapping::Affine { origin: [2.0, 1.0], matrix: [[-1.0, 0.0], [0.0, -1.0]] },
                cells: [cells_right; 2],
            },
        ],
    }
}

fn test_domains() -> Vec<DomainSpec> {
    vec![
        preset("unit-square-grid", PresetParams { cells: 3, refinement: Refinement::Explicit(vec![1, 0, 0, 0]), ..Default::default() }),
        preset("three-patch", PresetParams { cells: 3, refinement: Refinement::Explicit(vec![0, 1, 0]), ..Default::default() }),
        preset("curved-L-shape", PresetParams { cells: 3, level: 1, ..Default::default() }),
        preset("checkerboard", PresetParams { nx: 2, cells: 3, level: 1, ..Default::default() }),
        preset("L-corner-refined", PresetParams { cells: 3, level: 2, ..Default::default() }),
        flipped_pair(3, 6),
        flipped_pair(6, 3),
    ]
}

fn idempotence_defect(p: &SparseMatrix) -> f64 {
    p.matmul(p).unwrap().max_abs_diff(p).unwrap()
}

#[test]
fn projections_are_idempotent() {
    for spec in test_domains() {
        for p in 2..=3 {
            let s = spaces_of(&spec, p);
            for bc in [BoundaryCondition::None, BoundaryCondition::Homogeneous] {
                for r in 0..=p + 1 {
                    let p0 = assemble_p(&s, 0, r, bc).unwrap();
                    assert!(idempotence_defect(&p0.matrix) < 1e-11, "{} p={p} r={r} {bc:?} P0: {}", spec.name, idempotence_defect(&p0.matrix));
                    if r <= p {
                        let p1 = assemble_p(&s, 1, r, bc).unwrap();
                        assert!(idempotence_defect(&p1.matrix) < 1e-11, "{} p={p} r={r} {bc:?} P1: {}", spec.name, idempotence_defect(&p1.matrix));
                    }
                }
            }
        }
    }
}

#[test]
fn projected_sequence_is_a_complex() {
    for spec in test_domains() {
        let p = 3;
        let s = spaces_of(&spec, p);
        let g = gradient_matrix(&s).unwrap();
        let c = curl_matrix(&s).unwrap();
        assert_eq!(c.matmul(&g).unwrap().max_abs(), 0.0);
        for bc in [BoundaryCondition::None, BoundaryCondition::Homogeneous] {
            for r in 0..=p {
                let p0 = assemble_p(&s, 0, r, bc).unwrap().matrix;
                let p1 = assemble_p(&s, 1, r, bc).unwrap().matrix;
                let cpgp = c.matmul(&p1).unwrap().matmul(&g).unwrap().matmul(&p0).unwrap();
                assert!(cpgp.max_abs() < 1e-12, "{} r={r} {bc:?}: {}", spec.name, cpgp.max_abs());
            }
        }
    }
}

#[test]
fn factor_order_does_not_matter() {
    for spec in test_domains() {
        let s = spaces_of(&spec, 3);
        for bc in [BoundaryCondition::None, BoundaryCondition::Homogeneous] {
            for r in [0, 2, 4] {
                let a = assemble_p_ordered(&s, 0, r, bc, FactorOrder::Canonical).unwrap().matrix;
                let b = assemble_p_ordered(&s, 0, r, bc, FactorOrder::Reversed).unwrap().matrix;
                assert!(a.max_abs_diff(&b).unwrap() < 1e-12, "{} r={r} {bc:?}", spec.name);
            }
        }
    }
}

fn side_values(field: &FemField, side: SideRef, t: f64) -> FieldValue {
    let u = side.side.point(t);
    field.eval_patch(side.patch, u[0], u[1]).unwrap()
}

#[test]
fn range_is_continuous_across_interfaces() {
    for spec in test_domains() {
        let s = spaces_of(&spec, 3);
        for r in [0, 3] {
            for level in 0..=1 {
                let p = assemble_p(&s, level, r, BoundaryCondition::None).unwrap().matrix;
                let c: Vec<f64> = (0..s.dim(level)).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
                let f = FemField::new(s.clone(), level, p.mul_vec(&c).unwrap()).unwrap();
                for e in s.topology.interior_edges() {
                    let plus = e.plus.unwrap();
                    for i in 0..100 {
                        let t = i as f64 / 99.0;
                        let tp = if e.reversed { 1.0 - t } else { t };
                        let a = side_values(&f, e.minus, t);
                        let b = side_values(&f, plus, tp);
                        let x = { let u = e.minus.side.point(t); s.topology.patches[e.minus.patch].mapping.map(u[0], u[1]) };
                        let x1 = { let u = e.minus.side.point(1e-3 + t * (1.0 - 2e-3)); s.topology.patches[e.minus.patch].mapping.map(u[0], u[1]) };
                        let tau = [x1[0] - x[0], x1[1] - x[1]];
                        let diff = match (a, b) {
                            (FieldValue::Scalar(a), FieldValue::Scalar(b)) => (a - b).abs(),
                            (FieldValue::Vector(a), FieldValue::Vector(b)) => {
                                let n = tau[0].hypot(tau[1]).max(1e-300);
                                ((a[0] - b[0]) * tau[0] + (a[1] - b[1]) * tau[1]).abs() / n
                            }
                            _ => unreachable!(),
                        };
                        assert!(diff < 1e-10, "{} level {level} r={r} edge {}: {diff}", spec.name, e.id);
                    }
                }
            }
        }
    }
}

/// Moments ∫ λ_i q_j of every basis function of a space against the order-r Bernstein polynomials.
fn moments_1d(space: &UnivariateSpace, r: usize) -> Vec<Vec<f64>> {
    let rule = QuadratureRule::on_breakpoints(&space.knot_vector().breakpoints(), space.degree() + r + 2);
    let mut out = vec![vec![0.0; r]; space.dim()];
    for (&x, &w) in rule.points.iter().zip(&rule.weights) {
        let q = bernstein_basis(r, x);
        for (i, v) in space.eval_basis(x).unwrap().iter() {
            for j in 0..r {
                out[i][j] += w * v * q[j];
            }
        }
    }
    out
}

fn moment_defect(s: &DeRhamSpaces, level: usize, p: &SparseMatrix, r: usize) -> f64 {
    let pt = p.transpose();
    let mut worst = 0.0f64;
    for col in 0..s.dim(level) {
        let (cols, vals) = pt.row(col);
        if cols.len() == 1 && cols[0] == col && vals[0] == 1.0 {
            continue;
        }
        let mut v = vec![0.0; s.dim(level)];
        for (&i, &x) in cols.iter().zip(vals) {
            v[i] += x;
        }
        v[col] -= 1.0;
        for k in 0..s.num_patches() {
            let ps = &s.patches[k];
            for d in 0..PatchSpaces::num_components(level) {
                let (a, b) = ps.factors(level, d);
                let (ma, mb) = (moments_1d(a, r), moments_1d(b, r));
                let off = s.component_offset(level, k, d);
                for j1 in 0..r {
                    for j2 in 0..r {
                        let mut acc = 0.0;
                        for i1 in 0..a.dim() {
                            for i2 in 0..b.dim() {
                                acc += v[off + i1 * b.dim() + i2] * ma[i1][j1] * mb[i2][j2];
                            }
                        }
                        worst = worst.max(acc.abs());
                    }
                }
            }
        }
    }
    worst
}

#[test]
fn moments_are_preserved() {
    for spec in test_domains() {
        for p in 2..=3 {
            let s = spaces_of(&spec, p);
            for bc in [BoundaryCondition::None, BoundaryCondition::Homogeneous] {
                for r in 1..=p + 1 {
                    let p0 = assemble_p(&s, 0, r, bc).unwrap().matrix;
                    let d0 = moment_defect(&s, 0, &p0, r);
                    assert!(d0 < 1e-11, "{} p={p} r={r} {bc:?} level 0: {d0}", spec.name);
                    if r <= p {
                        let p1 = assemble_p(&s, 1, r, bc).unwrap().matrix;
                        let d1 = moment_defect(&s, 1, &p1, r);
                        assert!(d1 < 1e-11, "{} p={p} r={r} {bc:?} level 1: {d1}", spec.name);
                    }
                }
            }
        }
    }
}

#[test]
fn restriction_is_a_left_inverse_of_extension() {
    for p in 1..=4 {
        let coarse = UnivariateSpace::uniform(p, 4).unwrap();
        let fine = UnivariateSpace::uniform(p, 8).unwrap();
        for r in 0..=p + 1 {
            let e = knot_insertion_matrix(&coarse, &fine).unwrap();
            let rr = restriction_v0(&coarse, &fine, r).unwrap();
            let re = rr.matmul(&e).unwrap();
            assert!(re.max_abs_diff(&feec_core::linalg::DenseMatrix::identity(coarse.dim())) < 1e-12);
        }
    }
}

#[test]
fn checks_detect_broken_projections() {
    let spec = flipped_pair(3, 6);
    let s = spaces_of(&spec, 3);
    let p0 = assemble_p(&s, 0, 0, BoundaryCondition::None).unwrap().matrix;
    assert!(moment_defect(&s, 0, &p0, 2) > 1e-4);
    assert!(p0.max_abs_diff(&SparseMatrix::identity(s.dim(0))).unwrap() > 0.1);
    let c: Vec<f64> = (0..s.dim(1)).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
    let f = FemField::new(s.clone(), 1, c).unwrap();
    let e = s.topology.interior_edges().next().unwrap();
    let a = side_values(&f, e.minus, 0.3);
    let b = side_values(&f, e.plus.unwrap(), 0.7);
    assert_ne!(a, b);
}
