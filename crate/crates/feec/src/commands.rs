//! Subcommand implementations. Each returns the paths it wrote and prints a short summary.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use feec_core::conforming::{assemble_p, interface_operators, BoundaryCondition};
use feec_core::derham::{curl_matrix, gradient_matrix, mass_matrix, DeRhamSpaces, FemField};
use feec_core::linalg::{SparseMatrix, TripletBuilder};
use feec_core::operators::{effective_order, filtered_projection_scalar, filtered_projection_vector, WeakOperator};
use feec_core::solvers::{
    run_td_helmholtz, run_td_maxwell, solve_curlcurl_eig, solve_poisson, solve_time_harmonic_maxwell, ProblemConfig,
    RegionProbe, StaticSolution, TimeSeries,
};
use feec_core::verify::{projection_suite_with, Check};

use crate::cases::{self, InitialData};
use crate::config::{Format, RunConfig, SweepCell, SweepProblem};
use crate::error::{CliError, Result};
use crate::mm;
use crate::output::{self, num, ConvergenceRow};

/// Everything a subcommand needs besides its own arguments.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub format: Format,
    pub jobs: usize,
}

impl Context {
    /// Command-line values take precedence over `[output]`; the directory defaults to `out`.
    pub fn new(config: RunConfig, out: Option<PathBuf>, format: Option<Format>, jobs: Option<usize>) -> Self {
        let out = out.or_else(|| config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
        let format = format.or(config.output.format).unwrap_or_default();
        Self { config, out, format, jobs: jobs.unwrap_or(1).max(1) }
    }

    fn spaces(&self) -> Result<Arc<DeRhamSpaces>> {
        self.config.spaces(self.config.domain.degree, 0)
    }

    fn samples(&self) -> usize {
        self.config.output.samples
    }

    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Scales the non-unit diagonal entries of a projection by 1.1.
pub fn corrupt_projection(p: SparseMatrix) -> SparseMatrix {
    let mut b = TripletBuilder::new(p.nrows(), p.ncols());
    for (i, j, v) in p.triplets() {
        b.push(i, j, if i == j && v != 1.0 { 1.1 * v } else { v });
    }
    b.build()
}

/// Projection property suite for each configured order; failures map to exit code 4.
pub fn verify_projection(ctx: &Context, corrupt: bool) -> Result<Vec<(usize, Check)>> {
    let spaces = ctx.spaces()?;
    let pcfg = ctx.config.problem_config();
    let p = spaces.degree();
    let orders = if ctx.config.sweep.orders.is_empty() { vec![pcfg.order_for(p)] } else { ctx.config.sweep.orders.clone() };
    let tamper = |_: usize, m: SparseMatrix| corrupt_projection(m);
    let mut rows = Vec::new();
    for r in orders {
        let checks = projection_suite_with(&spaces, r, pcfg.bc, pcfg.seed, corrupt.then_some(&tamper as _))?;
        rows.extend(checks.into_iter().map(|c| (r, c)));
    }
    output::write_file(&ctx.file("verify.csv"), &output::checks_csv(&rows))?;
    println!("{:>5}  {:<20} {:>5}  {:>12}  {:>10}  status", "order", "check", "level", "value", "tolerance");
    for (r, c) in &rows {
        let status = if c.passed() { "pass" } else { "FAIL" };
        println!("{r:>5}  {:<20} {:>5}  {:>12.3e}  {:>10.1e}  {status}", c.name, c.level, c.value, c.tolerance);
    }
    let failed = rows.iter().filter(|(_, c)| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::Invariant(failed));
    }
    Ok(rows)
}

fn static_report(ctx: &Context, sol: &StaticSolution) -> Result<Vec<PathBuf>> {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let rows = [
        ("dof", sol.field.coeffs.len().to_string()),
        ("relative_residual", num(sol.relative_residual)),
        ("jump", num(sol.jump)),
        ("l2_error", opt(sol.l2_error)),
        ("relative_l2_error", opt(sol.relative_l2_error)),
    ];
    for (k, v) in &rows {
        println!("{k:<18} {v}");
    }
    let report = ctx.file("report.csv");
    output::write_file(&report, &output::report_csv(&rows))?;
    let mut paths = vec![report];
    paths.extend(output::write_field(&ctx.out, "solution", &sol.field, ctx.samples(), ctx.format)?);
    Ok(paths)
}

pub fn solve_poisson_cmd(ctx: &Context) -> Result<Vec<PathBuf>> {
    let spaces = ctx.spaces()?;
    let case = cases::poisson(ctx.config.case.name.as_deref().unwrap_or("sine"), cases::bounding_box(&spaces))?;
    let sol = solve_poisson(&spaces, &ctx.config.problem_config(), &case.source, case.exact.as_deref().map(|f| f as _))?;
    static_report(ctx, &sol)
}

pub fn solve_maxwell_cmd(ctx: &Context) -> Result<Vec<PathBuf>> {
    let spaces = ctx.spaces()?;
    let pcfg = ctx.config.problem_config();
    let case = cases::maxwell(ctx.config.case.name.as_deref().unwrap_or("sine"), cases::bounding_box(&spaces), pcfg.omega)?;
    let sol = solve_time_harmonic_maxwell(&spaces, &pcfg, &case.source, case.exact.as_deref().map(|f| f as _))?;
    static_report(ctx, &sol)
}

/// Curl-curl eigenpairs. Without an explicit shift the unit square uses `0.8 π²`, 80% of its
/// first eigenvalue; other domains keep the library default.
pub fn eig(ctx: &Context) -> Result<Vec<PathBuf>> {
    let spaces = ctx.spaces()?;
    let mut pcfg = ctx.config.problem_config();
    if ctx.config.problem.sigma.is_none() && ctx.config.domain.preset == "unit-square-grid" {
        pcfg.sigma = 0.8 * PI * PI;
    }
    let res = solve_curlcurl_eig(&spaces, &pcfg)?;
    for (l, r) in res.eigenvalues.iter().zip(&res.residuals) {
        println!("{l:.10}  (residual {r:.1e})");
    }
    let path = ctx.file("eigenvalues.csv");
    output::write_file(&path, &output::eigen_csv(&res))?;
    let mut paths = vec![path];
    if ctx.config.output.snapshots {
        for (i, v) in res.eigenvectors.iter().enumerate() {
            let field = FemField::new(spaces.clone(), 1, v.clone())?;
            paths.extend(output::write_field(&ctx.out, &format!("mode{i}"), &field, ctx.samples(), ctx.format)?);
        }
    }
    Ok(paths)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDomain {
    Maxwell,
    Helmholtz,
}

/// Patches whose closure contains `x`.
fn patches_containing(spaces: &DeRhamSpaces, x: [f64; 2]) -> Vec<usize> {
    (0..spaces.num_patches()).filter(|&k| spaces.topology.patches[k].mapping.inverse(x).is_some()).collect()
}

/// `center` and `outer` probes: the patches holding the pulse center and all the others.
pub fn reflection_probes(spaces: &DeRhamSpaces, center: [f64; 2]) -> Vec<RegionProbe> {
    let inner = patches_containing(spaces, center);
    let outer: Vec<usize> = (0..spaces.num_patches()).filter(|k| !inner.contains(k)).collect();
    let mut probes = vec![RegionProbe::new("center", inner)];
    if !outer.is_empty() {
        probes.push(RegionProbe::new("outer", outer));
    }
    probes
}

fn default_measure_after(spaces: &DeRhamSpaces, center: [f64; 2], width: f64) -> f64 {
    let mut reach = 0.0f64;
    for k in patches_containing(spaces, center) {
        let m = &spaces.topology.patches[k].mapping;
        for c in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
            let x = m.map(c[0], c[1]);
            reach = reach.max((x[0] - center[0]).hypot(x[1] - center[1]));
        }
    }
    reach + 5.0 * width
}

/// Leap-frog run. Boundary conditions default to `none` unless `[problem].bc` is set.
pub fn run_time_domain(ctx: &Context, kind: TimeDomain) -> Result<(TimeSeries, Vec<PathBuf>)> {
    let spaces = ctx.spaces()?;
    let mut pcfg: ProblemConfig = ctx.config.problem_config();
    if ctx.config.problem.bc.is_none() {
        pcfg.bc = BoundaryCondition::None;
    }
    pcfg.keep_fields = ctx.config.output.snapshots;
    let bbox = cases::bounding_box(&spaces);
    let case = &ctx.config.case;
    let center = case.center.unwrap_or_else(|| bbox.center());
    let name = case.name.as_deref().unwrap_or("pulse");
    let probes = reflection_probes(&spaces, center);
    let data = match kind {
        TimeDomain::Maxwell => cases::td_maxwell(name, case.pulse_width, center)?,
        TimeDomain::Helmholtz => cases::td_helmholtz(name, case.pulse_width, center, bbox, pcfg.bc)?,
    };
    let ts = match &data {
        InitialData::Maxwell { e0, b0 } => run_td_maxwell(&spaces, &pcfg, e0, b0, None, &probes)?,
        InitialData::Helmholtz { phi0, u0 } => run_td_helmholtz(&spaces, &pcfg, phi0, u0, &probes)?,
    };
    let series = ctx.file("timeseries.csv");
    output::write_file(&series, &output::time_series_csv(&ts))?;
    let t0 = case.measure_after.unwrap_or_else(|| default_measure_after(&spaces, center, case.pulse_width));
    let mut rows = vec![
        ("dt", num(ts.dt)),
        ("steps", ts.steps.to_string()),
        ("energy_drift", num(ts.energy_drift())),
        ("measure_after", num(t0)),
    ];
    for (i, name) in ts.region_names.iter().enumerate() {
        let a = ts.max_amplitude_after(i, t0).map(num).unwrap_or_default();
        rows.push((if name == "center" { "max_center_after" } else { "max_outer_after" }, a));
    }
    for (k, v) in &rows {
        println!("{k:<18} {v}");
    }
    let summary = ctx.file("summary.csv");
    output::write_file(&summary, &output::report_csv(&rows))?;
    let mut paths = vec![series, summary];
    let (primal, dual) = match kind {
        TimeDomain::Maxwell => ((1, "E"), (2, "B")),
        TimeDomain::Helmholtz => ((0, "phi"), (1, "U")),
    };
    let dir = ctx.file("snapshots");
    for (i, snap) in ts.snapshots.iter().enumerate() {
        for ((level, label), coeffs) in [(primal, &snap.state.primal), (dual, &snap.state.dual)] {
            let field = FemField::new(spaces.clone(), level, coeffs.clone())?;
            paths.extend(output::write_field(&dir, &format!("snap{i:04}_{label}"), &field, ctx.samples(), ctx.format)?);
        }
    }
    Ok((ts, paths))
}

/// Largest logical cell width over the patches of the layout refined `2^level` times.
fn mesh_size(cfg: &RunConfig, level: u32) -> Result<f64> {
    let spec = cfg.domain_spec()?.refined(1 << level);
    Ok(spec.patches.iter().flat_map(|p| p.cells).map(|c| 1.0 / c as f64).fold(0.0, f64::max))
}

fn relative(err: f64, norm: f64) -> f64 {
    if norm > 0.0 { err / norm } else { err }
}

/// `(dof, error)` of one sweep cell.
fn sweep_cell(cfg: &RunConfig, problem: SweepProblem, cell: SweepCell) -> Result<(usize, f64)> {
    let spaces = cfg.spaces(cell.degree, cell.level)?;
    let mut pcfg = cfg.problem_config();
    let r = cell.order.unwrap_or(cell.degree + 1);
    pcfg.order = Some(r);
    let name = cfg.case.name.as_deref().unwrap_or("sine");
    let no_exact = || CliError::Config(format!("case `{name}` has no exact solution to measure errors against"));
    match problem {
        SweepProblem::Poisson => {
            let case = cases::poisson(name, cases::bounding_box(&spaces))?;
            let exact = case.exact.as_deref().ok_or_else(no_exact)?;
            let sol = solve_poisson(&spaces, &pcfg, &case.source, Some(exact))?;
            Ok((spaces.dim(0), sol.l2_error.unwrap_or(f64::NAN)))
        }
        SweepProblem::MaxwellTh => {
            let case = cases::maxwell(name, cases::bounding_box(&spaces), pcfg.omega)?;
            let exact = case.exact.as_deref().ok_or_else(no_exact)?;
            let sol = solve_time_harmonic_maxwell(&spaces, &pcfg, &case.source, Some(exact))?;
            Ok((spaces.dim(1), sol.l2_error.unwrap_or(f64::NAN)))
        }
        SweepProblem::WeakDiv => {
            let u = filtered_projection_vector(&spaces, r, pcfg.bc, &cases::weak_div().source)?;
            let d = WeakOperator::div(&spaces, r, pcfg.bc)?.apply_field(&u)?;
            let norm = FemField::zeros(spaces.clone(), 0).l2_error_scalar(&cases::weak_div_exact)?;
            Ok((spaces.dim(0), relative(d.l2_error_scalar(&cases::weak_div_exact)?, norm)))
        }
        SweepProblem::WeakCurl => {
            let f = filtered_projection_scalar(&spaces, 2, r, pcfg.bc, &cases::weak_curl().source)?;
            let c = WeakOperator::curl(&spaces, r, pcfg.bc)?.apply_field(&f)?;
            let norm = FemField::zeros(spaces.clone(), 1).l2_error_vector(&cases::weak_curl_exact)?;
            Ok((spaces.dim(1), relative(c.l2_error_vector(&cases::weak_curl_exact)?, norm)))
        }
    }
}

/// Runs every sweep cell on up to `ctx.jobs` threads. A failing cell is recorded in its row
/// and the sweep continues.
pub fn convergence(ctx: &Context) -> Result<Vec<ConvergenceRow>> {
    let cfg = &ctx.config;
    let cells = cfg.sweep_cells();
    let problem = match (cfg.sweep.problem, cells.is_empty()) {
        (Some(p), _) => p,
        (None, true) => SweepProblem::Poisson,
        (None, false) => return Err(CliError::Config("[sweep].problem is required for a non-empty sweep".into())),
    };
    let run = |cell: SweepCell| -> Result<ConvergenceRow> {
        let h = mesh_size(cfg, cell.level)?;
        let (dof, error) = match sweep_cell(cfg, problem, cell) {
            Ok((dof, e)) => (dof, Ok(e)),
            Err(e @ (CliError::Core(_) | CliError::Invariant(_))) => {
                log::warn!("sweep cell {cell:?} failed: {e}");
                (0, Err(e.to_string()))
            }
            Err(e) => return Err(e),
        };
        let order = cell.order.unwrap_or(cell.degree + 1);
        Ok(ConvergenceRow { degree: cell.degree, order, level: cell.level, h, dof, error, observed_order: None })
    };
    let jobs = ctx.jobs.min(cells.len()).max(1);
    let mut results: Vec<Option<Result<ConvergenceRow>>> = (0..cells.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                let cells = &cells;
                let run = &run;
                s.spawn(move || {
                    (w..cells.len()).step_by(jobs).map(|i| (i, run(cells[i]))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("sweep worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    let mut rows = results.into_iter().map(|r| r.expect("every sweep cell is assigned")).collect::<Result<Vec<_>>>()?;
    output::fill_observed_orders(&mut rows);
    output::write_file(&ctx.file("convergence.csv"), &output::convergence_csv(&rows))?;
    for r in &rows {
        let e = match &r.error {
            Ok(e) => format!("{e:.4e}"),
            Err(m) => format!("failed: {m}"),
        };
        let q = r.observed_order.map(|q| format!("{q:.2}")).unwrap_or_default();
        println!("p={} r={} level={} dof={:<7} error={e} {q}", r.degree, r.order, r.level, r.dof);
    }
    Ok(rows)
}

fn export(dir: &Path, name: &str, m: &SparseMatrix, paths: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(format!("{name}.mtx"));
    mm::write(&path, m)?;
    paths.push(path);
    Ok(())
}

/// Projections, derivative and mass matrices, and the trace operators of every interior edge.
pub fn export_matrices(ctx: &Context) -> Result<Vec<PathBuf>> {
    let spaces = ctx.spaces()?;
    let pcfg = ctx.config.problem_config();
    let p = spaces.degree();
    let r = pcfg.order_for(p);
    std::fs::create_dir_all(&ctx.out).map_err(|e| CliError::io(&ctx.out, e))?;
    let mut paths = Vec::new();
    export(&ctx.out, "P0", &assemble_p(&spaces, 0, r, pcfg.bc)?.matrix, &mut paths)?;
    export(&ctx.out, "P1", &assemble_p(&spaces, 1, effective_order(1, r, p), pcfg.bc)?.matrix, &mut paths)?;
    export(&ctx.out, "G", &gradient_matrix(&spaces)?, &mut paths)?;
    export(&ctx.out, "C", &curl_matrix(&spaces)?, &mut paths)?;
    for level in 0..3 {
        export(&ctx.out, &format!("M{level}"), &mass_matrix(&spaces, level)?, &mut paths)?;
    }
    for edge in spaces.topology.edges.iter().filter(|e| !e.is_boundary()) {
        let ops = interface_operators(&spaces, edge, r)?;
        for (label, m) in [("E0", &ops.e0), ("R0", &ops.r0), ("E1", &ops.e1), ("R1", &ops.r1)] {
            export(&ctx.out, &format!("{label}_edge{}", edge.id), &SparseMatrix::from_dense(m), &mut paths)?;
        }
    }
    println!("wrote {} matrices to {}", paths.len(), ctx.out.display());
    Ok(paths)
}
