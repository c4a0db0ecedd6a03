//! TOML run configuration.
//!
//! Only `[domain]` with `preset` and `degree` is required; every other key has a default.
//! Unknown keys are rejected at any level.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use feec_core::conforming::BoundaryCondition;
use feec_core::derham::DeRhamSpaces;
use feec_core::geometry::{preset_domain, DomainSpec, PresetParams, Refinement};
use feec_core::solvers::ProblemConfig;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub case: CaseSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RefinementSpec {
    Named(String),
    Levels(Vec<u32>),
}

impl Default for RefinementSpec {
    fn default() -> Self {
        RefinementSpec::Named("uniform".into())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub preset: String,
    pub degree: usize,
    #[serde(default = "defaults::cells")]
    pub cells: usize,
    #[serde(default = "defaults::patches")]
    pub nx: usize,
    #[serde(default = "defaults::patches")]
    pub ny: usize,
    /// `uniform`, `center`, `surround`, `checkerboard` or one level per patch.
    #[serde(default)]
    pub refinement: RefinementSpec,
    /// Dyadic level used by the named refinements.
    #[serde(default = "defaults::refine_level")]
    pub refine_level: u32,
    /// Preset-specific level (curved-L-shape, L-corner-refined, checkerboard).
    #[serde(default)]
    pub level: u32,
    #[serde(default = "defaults::r_inner")]
    pub r_inner: f64,
    #[serde(default = "defaults::r_outer")]
    pub r_outer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bc {
    None,
    Homogeneous,
}

impl From<Bc> for BoundaryCondition {
    fn from(b: Bc) -> Self {
        match b {
            Bc::None => BoundaryCondition::None,
            Bc::Homogeneous => BoundaryCondition::Homogeneous,
        }
    }
}

/// Overrides of [`ProblemConfig`]; absent keys keep the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub order: Option<usize>,
    pub bc: Option<Bc>,
    pub alpha: Option<f64>,
    pub omega: Option<f64>,
    pub dt: Option<f64>,
    pub cfl: Option<f64>,
    pub t_max: Option<f64>,
    pub snapshot_stride: Option<usize>,
    pub num_eigs: Option<usize>,
    pub sigma: Option<f64>,
    pub kernel_threshold: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSection {
    /// Named manufactured solution or initial condition; see [`crate::cases`].
    pub name: Option<String>,
    #[serde(default = "defaults::pulse_width")]
    pub pulse_width: f64,
    /// Pulse center; the center of the domain's bounding box when absent.
    pub center: Option<[f64; 2]>,
    /// Start of the window for the reported post-crossing amplitudes of time-domain runs;
    /// when absent, the time a unit-speed front needs to clear the patches holding the
    /// center plus five pulse widths.
    pub measure_after: Option<f64>,
}

impl Default for CaseSection {
    fn default() -> Self {
        Self { name: None, pulse_width: defaults::pulse_width(), center: None, measure_after: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepProblem {
    Poisson,
    MaxwellTh,
    WeakDiv,
    WeakCurl,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub problem: Option<SweepProblem>,
    /// Degrees; `[domain].degree` when empty.
    #[serde(default)]
    pub degrees: Vec<usize>,
    /// Dyadic refinement levels of the whole layout.
    #[serde(default)]
    pub levels: Vec<u32>,
    /// Moment orders; the maximal order `p + 1` when empty.
    #[serde(default)]
    pub orders: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Vtk,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
    /// Samples per direction and patch for field snapshots.
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    /// Write field snapshots of time-domain runs.
    #[serde(default = "defaults::yes")]
    pub snapshots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: None, format: None, samples: defaults::samples(), snapshots: true }
    }
}

mod defaults {
    pub fn cells() -> usize {
        4
    }
    pub fn patches() -> usize {
        2
    }
    pub fn refine_level() -> u32 {
        1
    }
    pub fn r_inner() -> f64 {
        0.5
    }
    pub fn r_outer() -> f64 {
        1.0
    }
    pub fn pulse_width() -> f64 {
        0.1
    }
    pub fn samples() -> usize {
        32
    }
    pub fn yes() -> bool {
        true
    }
}

/// One point of a convergence sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepCell {
    pub degree: usize,
    /// `None` selects `p + 1`.
    pub order: Option<usize>,
    pub level: u32,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if !(1..=6).contains(&d.degree) {
            return Err(CliError::Config(format!("degree must lie in 1..=6, got {}", d.degree)));
        }
        self.domain_spec()?;
        self.problem_config().validate()?;
        if self.output.samples < 2 {
            return Err(CliError::Config("output.samples must be at least 2".into()));
        }
        if !(self.case.pulse_width > 0.0) {
            return Err(CliError::Config("case.pulse_width must be positive".into()));
        }
        if self.sweep.degrees.iter().any(|p| !(1..=6).contains(p)) {
            return Err(CliError::Config("sweep degrees must lie in 1..=6".into()));
        }
        if self.sweep.levels.iter().any(|&l| l > 6) {
            return Err(CliError::Config("sweep levels are limited to 0..=6".into()));
        }
        Ok(())
    }

    pub fn preset_params(&self) -> Result<PresetParams> {
        let d = &self.domain;
        let refinement = match &d.refinement {
            RefinementSpec::Levels(l) => Refinement::Explicit(l.clone()),
            RefinementSpec::Named(n) => match n.as_str() {
                "uniform" => Refinement::Uniform,
                "center" => Refinement::Center(d.refine_level),
                "surround" => Refinement::Surround(d.refine_level),
                "checkerboard" => Refinement::Checkerboard(d.refine_level),
                other => return Err(CliError::Config(format!("unknown refinement `{other}`"))),
            },
        };
        Ok(PresetParams {
            nx: d.nx,
            ny: d.ny,
            cells: d.cells,
            refinement,
            r_inner: d.r_inner,
            r_outer: d.r_outer,
            level: d.level,
        })
    }

    pub fn domain_spec(&self) -> Result<DomainSpec> {
        Ok(preset_domain(&self.domain.preset, &self.preset_params()?)?)
    }

    /// Spaces of degree `degree` on the layout refined `2^level` times.
    pub fn spaces(&self, degree: usize, level: u32) -> Result<Arc<DeRhamSpaces>> {
        let spec = self.domain_spec()?.refined(1 << level);
        Ok(Arc::new(DeRhamSpaces::new(spec.build(degree)?)?))
    }

    pub fn problem_config(&self) -> ProblemConfig {
        let p = &self.problem;
        let d = ProblemConfig::default();
        ProblemConfig {
            order: p.order.or(d.order),
            bc: p.bc.map(Into::into).unwrap_or(d.bc),
            alpha: p.alpha.unwrap_or(d.alpha),
            omega: p.omega.unwrap_or(d.omega),
            dt: p.dt.or(d.dt),
            cfl: p.cfl.unwrap_or(d.cfl),
            t_max: p.t_max.unwrap_or(d.t_max),
            snapshot_stride: p.snapshot_stride.unwrap_or(d.snapshot_stride),
            keep_fields: false,
            num_eigs: p.num_eigs.unwrap_or(d.num_eigs),
            sigma: p.sigma.unwrap_or(d.sigma),
            kernel_threshold: p.kernel_threshold.unwrap_or(d.kernel_threshold),
            seed: p.seed.unwrap_or(d.seed),
        }
    }

    /// Sweep points, degrees outermost, then orders, then levels, each in declared order.
    pub fn sweep_cells(&self) -> Vec<SweepCell> {
        let degrees = if self.sweep.degrees.is_empty() { vec![self.domain.degree] } else { self.sweep.degrees.clone() };
        let orders: Vec<Option<usize>> =
            if self.sweep.orders.is_empty() { vec![None] } else { self.sweep.orders.iter().map(|&r| Some(r)).collect() };
        let mut out = Vec::new();
        for &degree in &degrees {
            for &order in &orders {
                for &level in &self.sweep.levels {
                    out.push(SweepCell { degree, order, level });
                }
            }
        }
        out
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    RunConfig::from_toml(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
