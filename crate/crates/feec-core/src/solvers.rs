//! Discrete model problems on the broken sequence: Poisson, time-harmonic Maxwell,
//! the curl-curl eigenproblem and leap-frog time stepping for Maxwell and Helmholtz.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods exist only when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conforming::{assemble_p, BoundaryCondition};
use crate::derham::{
    curl_matrix, gradient_matrix, load_scalar, load_vector, mass_matrix, l2_project_scalar, l2_project_vector,
    DeRhamSpaces, FemField, MassSolver, ScalarFn, VectorFn,
};
use crate::error::{param, Error};
use crate::linalg::eigen::{generalized_eigs_with, EigenOptions, EigenResult};
use crate::linalg::sparse::{axpy, dot, norm2};
use crate::linalg::{SparseFactorization, SparseMatrix};
use crate::operators::{effective_order, filtered_coefficients, jump_stabilization};
use crate::Result;

/// Time-dependent vector source `J(t, x)`.
pub type SourceFn<'a> = &'a dyn Fn(f64, [f64; 2]) -> [f64; 2];

/// Numerical parameters shared by the model problems.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    /// Moment order `r`; `None` selects the maximal order `p + 1`.
    pub order: Option<usize>,
    pub bc: BoundaryCondition,
    /// Jump stabilization weight.
    pub alpha: f64,
    /// Time-harmonic frequency.
    pub omega: f64,
    /// Explicit time step; when absent it is `cfl · 2/√λ_max`.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub t_max: f64,
    /// Record diagnostics every this many steps.
    pub snapshot_stride: usize,
    /// Keep coefficient vectors of every snapshot.
    pub keep_fields: bool,
    pub num_eigs: usize,
    pub sigma: f64,
    /// Eigenvalues at or below this value count as kernel modes.
    pub kernel_threshold: f64,
    pub seed: u64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            order: None,
            bc: BoundaryCondition::Homogeneous,
            alpha: 1.0,
            omega: 1.0,
            dt: None,
            cfl: 0.5,
            t_max: 1.0,
            snapshot_stride: 10,
            keep_fields: false,
            num_eigs: 8,
            sigma: 0.8,
            kernel_threshold: 1e-6,
            seed: 7,
        }
    }
}

impl ProblemConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(param("alpha must be positive"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(param("cfl fraction must lie in (0, 1]"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(param("time step must be positive"));
            }
        }
        if !(self.t_max >= 0.0) || self.snapshot_stride == 0 {
            return Err(param("t_max must be nonnegative and the snapshot stride positive"));
        }
        if self.num_eigs == 0 || !(self.sigma > 0.0) {
            return Err(param("eigen count must be positive and the shift σ > 0"));
        }
        if !self.omega.is_finite() {
            return Err(param("omega must be finite"));
        }
        Ok(())
    }

    pub fn order_for(&self, degree: usize) -> usize {
        self.order.unwrap_or(degree + 1)
    }
}

/// Solution of a stationary problem.
#[derive(Debug, Clone)]
pub struct StaticSolution {
    pub field: FemField,
    pub relative_residual: f64,
    /// `√(cᵀ S c)`, the jump stabilization seminorm of the solution.
    pub jump: f64,
    pub l2_error: Option<f64>,
    pub relative_l2_error: Option<f64>,
}

fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    let ax = a.mul_vec(x)?;
    let r: Vec<f64> = ax.iter().zip(b).map(|(u, v)| u - v).collect();
    let bn = norm2(b);
    Ok(if bn == 0.0 { norm2(&r) } else { norm2(&r) / bn })
}

fn seminorm(s: &SparseMatrix, c: &[f64]) -> Result<f64> {
    Ok(dot(c, &s.mul_vec(c)?).max(0.0).sqrt())
}

/// `((𝔾ℙ⁰)ᵀM¹𝔾ℙ⁰ + α S⁰) φ = (ℙ⁰)ᵀ M⁰ f` with `ℙ⁰` the homogeneous projection.
pub fn solve_poisson(
    spaces: &Arc<DeRhamSpaces>,
    cfg: &ProblemConfig,
    f: ScalarFn<'_>,
    exact: Option<ScalarFn<'_>>,
) -> Result<StaticSolution> {
    cfg.validate()?;
    if cfg.bc != BoundaryCondition::Homogeneous {
        return Err(Error::Usage("the Poisson problem requires homogeneous boundary conditions".into()));
    }
    let r = cfg.order_for(spaces.degree());
    let p0 = assemble_p(spaces, 0, r, cfg.bc)?.matrix;
    let m0 = mass_matrix(spaces, 0)?;
    let m1 = mass_matrix(spaces, 1)?;
    let gp = gradient_matrix(spaces)?.matmul(&p0)?;
    let s0 = jump_stabilization(&p0, &m0)?;
    let stiff = gp.transpose().matmul(&m1.matmul(&gp)?)?;
    let a = stiff.add(1.0, &s0, cfg.alpha)?;
    let a = a.add(0.5, &a.transpose(), 0.5)?;
    let rhs = p0.mul_vec_transpose(&load_scalar(spaces, 0, f)?)?;
    let fact = SparseFactorization::cholesky(&a)
        .map_err(|e| Error::Numerical(format!("Poisson system is not positive definite: {e}")))?;
    let phi = fact.solve(&rhs)?;
    let res = relative_residual(&a, &phi, &rhs)?;
    let jump = seminorm(&s0, &phi)?;
    finish_static(FemField::new(spaces.clone(), 0, phi)?, res, jump, exact.map(Exact::Scalar))
}

enum Exact<'a> {
    Scalar(ScalarFn<'a>),
    Vector(VectorFn<'a>),
}

fn finish_static(field: FemField, res: f64, jump: f64, exact: Option<Exact<'_>>) -> Result<StaticSolution> {
    let (l2_error, relative_l2_error) = match exact {
        None => (None, None),
        Some(ex) => {
            let zero = FemField::zeros(field.spaces.clone(), field.level);
            let (err, norm) = match ex {
                Exact::Scalar(g) => (field.l2_error_scalar(g)?, zero.l2_error_scalar(g)?),
                Exact::Vector(g) => (field.l2_error_vector(g)?, zero.l2_error_vector(g)?),
            };
            (Some(err), Some(if norm > 0.0 { err / norm } else { err }))
        }
    };
    Ok(StaticSolution { field, relative_residual: res, jump, l2_error, relative_l2_error })
}

/// Pivot ratio below which the time-harmonic system is reported as resonant.
pub const RESONANCE_PIVOT_RATIO: f64 = 1e-12;

/// `(−ω²(ℙ¹)ᵀM¹ℙ¹ + (𝓒ℙ¹)ᵀM²𝓒ℙ¹ + α S¹) e = (ℙ¹)ᵀ M¹ j`.
pub fn solve_time_harmonic_maxwell(
    spaces: &Arc<DeRhamSpaces>,
    cfg: &ProblemConfig,
    j: VectorFn<'_>,
    exact: Option<VectorFn<'_>>,
) -> Result<StaticSolution> {
    cfg.validate()?;
    let p = spaces.degree();
    let p1 = assemble_p(spaces, 1, effective_order(1, cfg.order_for(p), p), cfg.bc)?.matrix;
    let m1 = mass_matrix(spaces, 1)?;
    let m2 = mass_matrix(spaces, 2)?;
    let cp = curl_matrix(spaces)?.matmul(&p1)?;
    let s1 = jump_stabilization(&p1, &m1)?;
    let pmp = p1.transpose().matmul(&m1.matmul(&p1)?)?;
    let cc = cp.transpose().matmul(&m2.matmul(&cp)?)?;
    let a = cc.add(1.0, &pmp, -cfg.omega * cfg.omega)?.add(1.0, &s1, cfg.alpha)?;
    let a = a.add(0.5, &a.transpose(), 0.5)?;
    let rhs = p1.mul_vec_transpose(&load_vector(spaces, j)?)?;
    let fact = SparseFactorization::lu(&a).map_err(|_| resonance(cfg.omega))?;
    if fact.pivot_ratio().unwrap_or(1.0) < RESONANCE_PIVOT_RATIO {
        return Err(resonance(cfg.omega));
    }
    let e = fact.solve(&rhs)?;
    let res = relative_residual(&a, &e, &rhs)?;
    if res > 1e-10 {
        return Err(Error::Numerical(format!("time-harmonic residual {res:.2e} exceeds 1e-10; ω may be resonant")));
    }
    let jump = seminorm(&s1, &e)?;
    finish_static(FemField::new(spaces.clone(), 1, e)?, res, jump, exact.map(Exact::Vector))
}

fn resonance(omega: f64) -> Error {
    Error::Numerical(format!("ω² = {} is numerically a discrete eigenvalue; choose another frequency", omega * omega))
}

/// Matrices of the curl-curl pencil `(𝓒ℙ¹)ᵀM²𝓒ℙ¹ e = λ (α S¹ + (ℙ¹)ᵀM¹ℙ¹) e`.
pub fn curlcurl_pencil(spaces: &DeRhamSpaces, cfg: &ProblemConfig) -> Result<(SparseMatrix, SparseMatrix)> {
    let p = spaces.degree();
    let p1 = assemble_p(spaces, 1, effective_order(1, cfg.order_for(p), p), cfg.bc)?.matrix;
    let m1 = mass_matrix(spaces, 1)?;
    let m2 = mass_matrix(spaces, 2)?;
    let cp = curl_matrix(spaces)?.matmul(&p1)?;
    let a = cp.transpose().matmul(&m2.matmul(&cp)?)?;
    let b = p1.transpose().matmul(&m1.matmul(&p1)?)?.add(1.0, &jump_stabilization(&p1, &m1)?, cfg.alpha)?;
    Ok((a.add(0.5, &a.transpose(), 0.5)?, b.add(0.5, &b.transpose(), 0.5)?))
}

/// The `num_eigs` nonzero eigenvalues nearest `σ`, skipping the gradient kernel.
pub fn solve_curlcurl_eig(spaces: &DeRhamSpaces, cfg: &ProblemConfig) -> Result<EigenResult> {
    cfg.validate()?;
    let (a, b) = curlcurl_pencil(spaces, cfg)?;
    let mut opts = EigenOptions::new(cfg.num_eigs, cfg.sigma);
    opts.exclude_below = Some(cfg.kernel_threshold);
    opts.seed = cfg.seed;
    generalized_eigs_with(&a, &b, &opts)
}

/// Coefficients of a leap-frog state: `primal` is updated through a mass solve,
/// `dual` explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct LeapfrogState {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
}

/// Semi-discrete system `M ∂ₜx = Kᵀ N y − s`, `∂ₜy = −K x` and its leap-frog integrator.
///
/// Maxwell uses `x = e`, `y = b`, `K = 𝓒ℙ¹`, `M = M¹`, `N = M²`; Helmholtz uses
/// `x = φ`, `y = u`, `K = 𝔾ℙ⁰`, `M = M⁰`, `N = M¹`.
#[derive(Debug, Clone)]
pub struct Leapfrog {
    pub spaces: Arc<DeRhamSpaces>,
    pub primal_level: usize,
    /// Conforming projection of the primal space.
    pub projection: SparseMatrix,
    pub k: SparseMatrix,
    kt_n: SparseMatrix,
    pub primal_mass: SparseMatrix,
    pub dual_mass: SparseMatrix,
    solver: MassSolver,
}

impl Leapfrog {
    pub fn maxwell(spaces: &Arc<DeRhamSpaces>, cfg: &ProblemConfig) -> Result<Self> {
        let p = spaces.degree();
        let p1 = assemble_p(spaces, 1, effective_order(1, cfg.order_for(p), p), cfg.bc)?.matrix;
        let k = curl_matrix(spaces)?.matmul(&p1)?;
        Self::from_parts(spaces, 1, p1, k)
    }

    pub fn helmholtz(spaces: &Arc<DeRhamSpaces>, cfg: &ProblemConfig) -> Result<Self> {
        let p0 = assemble_p(spaces, 0, cfg.order_for(spaces.degree()), cfg.bc)?.matrix;
        let k = gradient_matrix(spaces)?.matmul(&p0)?;
        Self::from_parts(spaces, 0, p0, k)
    }

    fn from_parts(spaces: &Arc<DeRhamSpaces>, level: usize, projection: SparseMatrix, k: SparseMatrix) -> Result<Self> {
        let primal_mass = mass_matrix(spaces, level)?;
        let dual_mass = mass_matrix(spaces, level + 1)?;
        let kt_n = k.transpose().matmul(&dual_mass)?;
        let solver = MassSolver::from_matrix(spaces, level, &primal_mass)?;
        Ok(Self { spaces: spaces.clone(), primal_level: level, projection, k, kt_n, primal_mass, dual_mass, solver })
    }

    pub fn zero_state(&self) -> LeapfrogState {
        LeapfrogState { primal: vec![0.0; self.k.ncols()], dual: vec![0.0; self.k.nrows()] }
    }

    /// One step; `source` is the already assembled `s` at the half step.
    pub fn step(&self, state: &mut LeapfrogState, dt: f64, source: Option<&[f64]>) -> Result<()> {
        let kx = self.k.mul_vec(&state.primal)?;
        axpy(-0.5 * dt, &kx, &mut state.dual);
        let mut rhs = self.kt_n.mul_vec(&state.dual)?;
        if let Some(s) = source {
            axpy(-1.0, s, &mut rhs);
        }
        let dx = self.solver.solve(&rhs)?;
        axpy(dt, &dx, &mut state.primal);
        let kx = self.k.mul_vec(&state.primal)?;
        axpy(-0.5 * dt, &kx, &mut state.dual);
        Ok(())
    }

    /// `½ (xᵀ M x + yᵀ N y)`.
    pub fn energy(&self, state: &LeapfrogState) -> Result<f64> {
        let a = dot(&state.primal, &self.primal_mass.mul_vec(&state.primal)?);
        let b = dot(&state.dual, &self.dual_mass.mul_vec(&state.dual)?);
        Ok(0.5 * (a + b))
    }

    /// `‖(𝕀 − ℙ) x‖_M`.
    pub fn jump(&self, state: &LeapfrogState) -> Result<f64> {
        let px = self.projection.mul_vec(&state.primal)?;
        let d: Vec<f64> = state.primal.iter().zip(&px).map(|(a, b)| a - b).collect();
        Ok(dot(&d, &self.primal_mass.mul_vec(&d)?).max(0.0).sqrt())
    }

    /// Largest eigenvalue of `M⁻¹ Kᵀ N K` by power iteration.
    pub fn max_eigenvalue(&self, iterations: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..self.k.ncols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let w = self.solver.solve(&self.kt_n.mul_vec(&self.k.mul_vec(&v)?)?)?;
            let mv = self.primal_mass.mul_vec(&v)?;
            lambda = dot(&mv, &w) / dot(&mv, &v);
            let nw = norm2(&w);
            if !(nw > 0.0) {
                return Ok(0.0);
            }
            v = w.into_iter().map(|x| x / nw).collect();
        }
        Ok(lambda)
    }

    /// `cfl · 2/√λ_max` with `λ_max` from 50 power iterations.
    pub fn stable_dt(&self, cfl: f64, seed: u64) -> Result<f64> {
        let lambda = self.max_eigenvalue(50, seed)?;
        if !(lambda > 0.0) {
            return Err(Error::Numerical("the spatial operator vanishes; set the time step explicitly".into()));
        }
        Ok(cfl * 2.0 / lambda.sqrt())
    }
}

/// Maximum sampled field magnitude over a set of patches.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionProbe {
    pub name: String,
    pub patches: Vec<usize>,
    /// Samples per direction on each patch, at cell-interior positions `(i + ½)/n`.
    pub samples: usize,
}

impl RegionProbe {
    pub fn new(name: impl Into<String>, patches: Vec<usize>) -> Self {
        Self { name: name.into(), patches, samples: 16 }
    }

    pub fn amplitude(&self, field: &FemField) -> Result<f64> {
        let n = self.samples;
        let mut out = 0.0f64;
        for &k in &self.patches {
            if k >= field.spaces.num_patches() {
                return Err(param(format!("probe `{}` names patch {k} which does not exist", self.name)));
            }
            for i in 0..n {
                for j in 0..n {
                    let (s, t) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                    out = out.max(field.eval_patch(k, s, t)?.magnitude());
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub state: LeapfrogState,
}

/// Diagnostics recorded every `snapshot_stride` steps, including the initial and final state.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub jump: Vec<f64>,
    pub region_names: Vec<String>,
    /// `amplitudes[snapshot][region]`.
    pub amplitudes: Vec<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
}

impl TimeSeries {
    /// Largest amplitude of region `region` over snapshots at times `≥ t0`.
    pub fn max_amplitude_after(&self, region: usize, t0: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.amplitudes)
            .filter(|(&t, _)| t >= t0 - 1e-12)
            .map(|(_, a)| a[region])
            .reduce(f64::max)
    }

    /// `max |H(t) − H(0)| / H(0)`.
    pub fn energy_drift(&self) -> f64 {
        let h0 = self.energy.first().copied().unwrap_or(0.0);
        if h0 == 0.0 {
            return 0.0;
        }
        self.energy.iter().map(|h| (h - h0).abs() / h0).fold(0.0, f64::max)
    }
}

/// Runs the leap-frog scheme from `state` up to `cfg.t_max`.
pub fn integrate(
    scheme: &Leapfrog,
    cfg: &ProblemConfig,
    mut state: LeapfrogState,
    source: Option<&dyn Fn(f64) -> Result<Vec<f64>>>,
    probes: &[RegionProbe],
) -> Result<TimeSeries> {
    cfg.validate()?;
    let dt0 = match cfg.dt {
        Some(dt) => dt,
        None => scheme.stable_dt(cfg.cfl, cfg.seed)?,
    };
    let steps = (cfg.t_max / dt0).ceil() as usize;
    let dt = if steps == 0 { dt0 } else { cfg.t_max / steps as f64 };
    log::info!("leap-frog: {steps} steps of Δt = {dt:.4e}");
    let mut series = TimeSeries {
        dt,
        steps,
        times: Vec::new(),
        energy: Vec::new(),
        jump: Vec::new(),
        region_names: probes.iter().map(|p| p.name.clone()).collect(),
        amplitudes: Vec::new(),
        snapshots: Vec::new(),
    };
    let record = |series: &mut TimeSeries, t: f64, state: &LeapfrogState| -> Result<()> {
        series.times.push(t);
        series.energy.push(scheme.energy(state)?);
        series.jump.push(scheme.jump(state)?);
        let field = FemField::new(scheme.spaces.clone(), scheme.primal_level, state.primal.clone())?;
        series.amplitudes.push(probes.iter().map(|p| p.amplitude(&field)).collect::<Result<_>>()?);
        if cfg.keep_fields {
            series.snapshots.push(Snapshot { time: t, state: state.clone() });
        }
        Ok(())
    };
    record(&mut series, 0.0, &state)?;
    let h0 = series.energy[0];
    for n in 0..steps {
        let t_half = (n as f64 + 0.5) * dt;
        let s = match source {
            Some(f) => Some(f(t_half)?),
            None => None,
        };
        scheme.step(&mut state, dt, s.as_deref())?;
        let t = (n + 1) as f64 * dt;
        if (n + 1) % cfg.snapshot_stride == 0 || n + 1 == steps {
            record(&mut series, t, &state)?;
            let h = *series.energy.last().unwrap();
            if !h.is_finite() || (h0 > 0.0 && h > 10.0 * h0) {
                return Err(Error::Cfl(format!("energy grew from {h0:.3e} to {h:.3e} by t = {t:.3}; reduce Δt")));
            }
        }
    }
    Ok(series)
}

/// Leap-frog Maxwell from `E₀, B₀` with optional current `J`.
///
/// `e⁰` is the filtered projection `Π̃¹E₀` and `b⁰` the broken L² projection of `B₀`.
pub fn run_td_maxwell(
    spaces: &Arc<DeRhamSpaces>,
    cfg: &ProblemConfig,
    e0: VectorFn<'_>,
    b0: ScalarFn<'_>,
    j: Option<SourceFn<'_>>,
    probes: &[RegionProbe],
) -> Result<TimeSeries> {
    cfg.validate()?;
    let scheme = Leapfrog::maxwell(spaces, cfg)?;
    let primal = filtered_coefficients(spaces, 1, Some(&scheme.projection), &load_vector(spaces, e0)?)?;
    let dual = l2_project_scalar(spaces, 2, b0)?.coeffs;
    let state = LeapfrogState { primal, dual };
    match j {
        None => integrate(&scheme, cfg, state, None, probes),
        Some(j) => {
            let src = |t: f64| -> Result<Vec<f64>> {
                scheme.projection.mul_vec_transpose(&load_vector(spaces, &|x| j(t, x))?)
            };
            integrate(&scheme, cfg, state, Some(&src), probes)
        }
    }
}

/// Leap-frog Helmholtz from `φ₀, U₀`; `φ⁰ = Π̃⁰φ₀` and `u⁰` is the broken L² projection of `U₀`.
pub fn run_td_helmholtz(
    spaces: &Arc<DeRhamSpaces>,
    cfg: &ProblemConfig,
    phi0: ScalarFn<'_>,
    u0: VectorFn<'_>,
    probes: &[RegionProbe],
) -> Result<TimeSeries> {
    cfg.validate()?;
    let scheme = Leapfrog::helmholtz(spaces, cfg)?;
    let primal = filtered_coefficients(spaces, 0, Some(&scheme.projection), &load_scalar(spaces, 0, phi0)?)?;
    let dual = l2_project_vector(spaces, u0)?.coeffs;
    integrate(&scheme, cfg, LeapfrogState { primal, dual }, None, probes)
}
