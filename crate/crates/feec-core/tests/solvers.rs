use std::f64::consts::PI;
use std::sync::Arc;

use feec_core::conforming::BoundaryCondition;
use feec_core::derham::*;
use feec_core::geometry::*;
use feec_core::solvers::*;
use feec_core::Error;

fn spaces(name: &str, params: PresetParams, p: usize) -> Arc<DeRhamSpaces> {
    Arc::new(DeRhamSpaces::new(preset_domain(name, &params).unwrap().build(p).unwrap()).unwrap())
}

fn refined_square(cells: usize, p: usize) -> Arc<DeRhamSpaces> {
    let params = PresetParams { cells, refinement: Refinement::Explicit(vec![1, 0, 0, 0]), ..Default::default() };
    spaces("unit-square-grid", params, p)
}

fn order(e0: f64, e1: f64) -> f64 {
    (e0 / e1).log2()
}

fn sine(x: [f64; 2]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

#[test]
fn poisson_zero_source_gives_zero() {
    let s = refined_square(3, 2);
    let sol = solve_poisson(&s, &ProblemConfig::default(), &|_| 0.0, None).unwrap();
    assert!(sol.field.coeffs.iter().all(|&v| v == 0.0));
}

#[test]
fn poisson_requires_homogeneous_conditions() {
    let s = refined_square(3, 2);
    let cfg = ProblemConfig { bc: BoundaryCondition::None, ..Default::default() };
    assert!(matches!(solve_poisson(&s, &cfg, &sine, None), Err(Error::Usage(_))));
}

#[test]
fn poisson_converges_at_order_p_plus_one() {
    let f = |x: [f64; 2]| 2.0 * PI * PI * sine(x);
    for p in 2..=3 {
        let errs: Vec<f64> = [3, 6, 12]
            .iter()
            .map(|&c| {
                let sol = solve_poisson(&refined_square(c, p), &ProblemConfig::default(), &f, Some(&sine)).unwrap();
                assert!(sol.relative_residual < 1e-11);
                assert!(sol.jump < 1e-8, "jump {}", sol.jump);
                sol.relative_l2_error.unwrap()
            })
            .collect();
        let k = order(errs[1], errs[2]);
        assert!((k - (p + 1) as f64).abs() < 0.3, "p={p}: {errs:?} order {k}");
    }
}

#[test]
fn poisson_error_is_insensitive_to_alpha() {
    let f = |x: [f64; 2]| 2.0 * PI * PI * sine(x);
    let s = refined_square(6, 2);
    let errs: Vec<f64> = [0.1, 1.0, 10.0]
        .iter()
        .map(|&alpha| {
            let cfg = ProblemConfig { alpha, ..Default::default() };
            solve_poisson(&s, &cfg, &f, Some(&sine)).unwrap().relative_l2_error.unwrap()
        })
        .collect();
    for e in &errs {
        assert!((e / errs[1] - 1.0).abs() < 0.1, "{errs:?}");
    }
}

// E ∈ H₀(curl) on the unit square: a curl-carrying part plus the gradient of a bubble.
fn maxwell_exact(x: [f64; 2]) -> [f64; 2] {
    let (sx, sy, cx, cy) = ((PI * x[0]).sin(), (PI * x[1]).sin(), (PI * x[0]).cos(), (PI * x[1]).cos());
    [sy + PI * cx * sy, sx + PI * sx * cy]
}

fn maxwell_source(omega: f64) -> impl Fn([f64; 2]) -> [f64; 2] {
    move |x| {
        let e = maxwell_exact(x);
        let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
        [PI * PI * sy - omega * omega * e[0], PI * PI * sx - omega * omega * e[1]]
    }
}

#[test]
fn time_harmonic_maxwell_converges_at_order_p() {
    let cfg = ProblemConfig { omega: 1.5, ..Default::default() };
    let j = maxwell_source(cfg.omega);
    for p in 2..=3 {
        let errs: Vec<f64> = [3, 6, 12]
            .iter()
            .map(|&c| {
                let sol = solve_time_harmonic_maxwell(&refined_square(c, p), &cfg, &j, Some(&maxwell_exact)).unwrap();
                sol.relative_l2_error.unwrap()
            })
            .collect();
        let k = order(errs[1], errs[2]);
        assert!((k - p as f64).abs() < 0.3, "p={p}: {errs:?} order {k}");
    }
}

#[test]
fn time_harmonic_maxwell_without_source_is_zero() {
    let s = refined_square(3, 2);
    let cfg = ProblemConfig { omega: 0.5, bc: BoundaryCondition::None, ..Default::default() };
    let sol = solve_time_harmonic_maxwell(&s, &cfg, &|_| [0.0, 0.0], None).unwrap();
    assert!(sol.field.coeffs.iter().all(|&v| v == 0.0));
}

fn square_pi(cells: usize) -> Arc<DeRhamSpaces> {
    let params = PresetParams { cells, refinement: Refinement::Explicit(vec![1, 0, 0, 0]), ..Default::default() };
    spaces("square-pi-grid", params, 3)
}

const SQUARE_SPECTRUM: [f64; 8] = [1.0, 1.0, 2.0, 4.0, 4.0, 5.0, 5.0, 8.0];

#[test]
fn curl_curl_spectrum_on_refined_square() {
    let s = square_pi(4);
    let res = solve_curlcurl_eig(&s, &ProblemConfig::default()).unwrap();
    for (l, e) in res.eigenvalues.iter().zip(SQUARE_SPECTRUM) {
        assert!((l - e).abs() / e < 1e-4, "{:?}", res.eigenvalues);
    }
    assert!(res.residuals.iter().all(|&r| r < 1e-8));
    let other = solve_curlcurl_eig(&s, &ProblemConfig { sigma: 2.5, seed: 11, ..Default::default() }).unwrap();
    for (a, b) in res.eigenvalues.iter().zip(&other.eigenvalues) {
        assert!((a - b).abs() <= 1e-8 * a, "{:?} vs {:?}", res.eigenvalues, other.eigenvalues);
    }
}

#[test]
fn curl_curl_on_three_patch_domain_self_converges() {
    let run = |cells| {
        let s = spaces("three-patch", PresetParams { cells, refinement: Refinement::Explicit(vec![0, 1, 0]), ..Default::default() }, 2);
        let cfg = ProblemConfig { num_eigs: 4, sigma: 1.0, ..Default::default() };
        solve_curlcurl_eig(&s, &cfg).unwrap().eigenvalues
    };
    let (a, b, c) = (run(3), run(6), run(12));
    for i in 0..4 {
        assert!(a[i] > 1e-6);
        let (d1, d2) = ((a[i] - b[i]).abs(), (b[i] - c[i]).abs());
        assert!(d2 < d1 && d2 / c[i] < 1e-3, "{a:?} {b:?} {c:?}");
    }
}

fn gaussian_e(x: [f64; 2]) -> [f64; 2] {
    let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
    let g = (-(dx * dx + dy * dy) / 0.02).exp();
    [dy * g, -dx * g]
}

fn maxwell_scheme(r: usize) -> (Arc<DeRhamSpaces>, Leapfrog, ProblemConfig) {
    let s = refined_square(4, 3);
    let cfg = ProblemConfig { order: Some(r), bc: BoundaryCondition::None, ..Default::default() };
    let scheme = Leapfrog::maxwell(&s, &cfg).unwrap();
    (s, scheme, cfg)
}

#[test]
fn leapfrog_is_time_reversible() {
    let (s, scheme, cfg) = maxwell_scheme(4);
    let e0 = l2_project_vector(&s, &gaussian_e).unwrap().coeffs;
    let initial = LeapfrogState { primal: e0, dual: vec![0.0; s.dim(2)] };
    let dt = scheme.stable_dt(cfg.cfl, cfg.seed).unwrap();
    let mut state = initial.clone();
    for _ in 0..200 {
        scheme.step(&mut state, dt, None).unwrap();
    }
    for _ in 0..200 {
        scheme.step(&mut state, -dt, None).unwrap();
    }
    let scale = initial.primal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = state.primal.iter().zip(&initial.primal).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let err_b = state.dual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(err.max(err_b) <= 1e-9 * scale, "{err} {err_b}");
}

#[test]
fn leapfrog_energy_stays_bounded() {
    let (s, scheme, cfg) = maxwell_scheme(4);
    let dt = scheme.stable_dt(cfg.cfl, cfg.seed).unwrap();
    let cfg = ProblemConfig { t_max: 1000.0 * dt, snapshot_stride: 1, ..cfg };
    let e0 = l2_project_vector(&s, &gaussian_e).unwrap().coeffs;
    let series = integrate(&scheme, &cfg, LeapfrogState { primal: e0, dual: vec![0.0; s.dim(2)] }, None, &[]).unwrap();
    assert_eq!(series.steps, 1000);
    assert!(series.energy_drift() <= 1e-2, "{}", series.energy_drift());
}

#[test]
fn zero_data_stays_zero() {
    let s = refined_square(3, 2);
    let cfg = ProblemConfig { bc: BoundaryCondition::None, t_max: 0.2, snapshot_stride: 5, ..Default::default() };
    let probes = [RegionProbe::new("all", (0..4).collect())];
    let ts = run_td_maxwell(&s, &cfg, &|_| [0.0, 0.0], &|_| 0.0, None, &probes).unwrap();
    assert!(ts.energy.iter().chain(ts.amplitudes.iter().flatten()).all(|&v| v == 0.0));
    let ts = run_td_helmholtz(&s, &cfg, &|_| 0.0, &|_| [0.0, 0.0], &probes).unwrap();
    assert!(ts.energy.iter().all(|&v| v == 0.0));
    assert!(ts.times.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn oversized_time_step_is_reported() {
    let (s, scheme, cfg) = maxwell_scheme(4);
    let dt = scheme.stable_dt(1.0, 7).unwrap();
    let cfg = ProblemConfig { dt: Some(3.0 * dt), t_max: 400.0 * dt, snapshot_stride: 5, ..cfg };
    let res = run_td_maxwell(&s, &cfg, &gaussian_e, &|_| 0.0, None, &[]);
    assert!(matches!(res, Err(Error::Cfl(_))), "{res:?}");
}

#[test]
fn helmholtz_standing_wave_has_the_analytic_frequency() {
    let s = spaces("unit-square-grid", PresetParams { nx: 1, ny: 1, cells: 8, ..Default::default() }, 3);
    let cfg = ProblemConfig { t_max: 5.0, snapshot_stride: 1, keep_fields: true, ..Default::default() };
    let ts = run_td_helmholtz(&s, &cfg, &sine, &|_| [0.0, 0.0], &[]).unwrap();
    let values: Vec<f64> = ts
        .snapshots
        .iter()
        .map(|snap| {
            let f = FemField::new(s.clone(), 0, snap.state.primal.clone()).unwrap();
            match f.eval_physical([0.5, 0.5]).unwrap() {
                FieldValue::Scalar(v) => v,
                FieldValue::Vector(_) => unreachable!(),
            }
        })
        .collect();
    let mut crossings = Vec::new();
    for i in 1..values.len() {
        if values[i - 1] * values[i] < 0.0 {
            let w = values[i - 1] / (values[i - 1] - values[i]);
            crossings.push(ts.times[i - 1] + w * (ts.times[i] - ts.times[i - 1]));
        }
    }
    assert!(crossings.len() >= 4);
    let half_period = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    let freq = PI / half_period;
    assert!((freq / (PI * 2f64.sqrt()) - 1.0).abs() < 0.01, "{freq}");
}

#[test]
fn static_frequency_is_reported_as_resonant() {
    // At ω = 0 every conforming gradient lies in the kernel of the system.
    let s = refined_square(3, 2);
    let cfg = ProblemConfig { omega: 0.0, bc: BoundaryCondition::None, ..Default::default() };
    let res = solve_time_harmonic_maxwell(&s, &cfg, &|x| [x[1], 1.0], None);
    assert!(matches!(res, Err(Error::Numerical(_))), "{:?}", res.map(|r| r.relative_residual));
}
