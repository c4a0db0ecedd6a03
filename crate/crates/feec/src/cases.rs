//! Named manufactured solutions and initial conditions.
//!
//! The `sine` cases live on the axis-aligned bounding box `[x₀, x₁] × [y₀, y₁]` of the
//! domain, with `X = x − x₀`, `Y = y − y₀`, `a = π/(x₁ − x₀)` and `b = π/(y₁ − y₀)`. They
//! satisfy the homogeneous boundary conditions exactly when the domain is that box.

use std::f64::consts::PI;

use feec_core::conforming::BoundaryCondition;
use feec_core::derham::DeRhamSpaces;

use crate::error::{CliError, Result};

pub type Scalar = Box<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
pub type Vector = Box<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl BoundingBox {
    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.min[0] + self.max[0]), 0.5 * (self.min[1] + self.max[1])]
    }

    fn wave_numbers(&self) -> (f64, f64) {
        (PI / (self.max[0] - self.min[0]), PI / (self.max[1] - self.min[1]))
    }
}

/// Box enclosing the images of a 21 × 21 logical grid on every patch.
pub fn bounding_box(spaces: &DeRhamSpaces) -> BoundingBox {
    let mut b = BoundingBox { min: [f64::INFINITY; 2], max: [f64::NEG_INFINITY; 2] };
    for patch in &spaces.topology.patches {
        for i in 0..=20 {
            for j in 0..=20 {
                let x = patch.mapping.map(i as f64 / 20.0, j as f64 / 20.0);
                for d in 0..2 {
                    b.min[d] = b.min[d].min(x[d]);
                    b.max[d] = b.max[d].max(x[d]);
                }
            }
        }
    }
    b
}

fn unknown(kind: &str, name: &str, known: &[&str]) -> CliError {
    CliError::Config(format!("unknown {kind} case `{name}`; expected one of {}", known.join(", ")))
}

pub struct ScalarCase {
    pub source: Scalar,
    pub exact: Option<Scalar>,
}

pub struct VectorCase {
    pub source: Vector,
    pub exact: Option<Vector>,
}

/// `sine`: `φ = sin aX sin bY`, `f = (a² + b²) φ`. `unit-source`: `f = 1`, no exact solution.
pub fn poisson(name: &str, bbox: BoundingBox) -> Result<ScalarCase> {
    let (a, b) = bbox.wave_numbers();
    let [x0, y0] = bbox.min;
    match name {
        "sine" => {
            let phi = move |x: [f64; 2]| (a * (x[0] - x0)).sin() * (b * (x[1] - y0)).sin();
            Ok(ScalarCase { source: Box::new(move |x| (a * a + b * b) * phi(x)), exact: Some(Box::new(phi)) })
        }
        "unit-source" => Ok(ScalarCase { source: Box::new(|_| 1.0), exact: None }),
        other => Err(unknown("poisson", other, &["sine", "unit-source"])),
    }
}

/// `sine`: `E = (sin bY + a cos aX sin bY, sin aX + b sin aX cos bY)`, whose tangential trace
/// vanishes on the box, and `J = curl curl E − ω² E = (b² sin bY, a² sin aX) − ω² E`.
/// `zero`: `J = 0` and `E = 0`.
pub fn maxwell(name: &str, bbox: BoundingBox, omega: f64) -> Result<VectorCase> {
    let (a, b) = bbox.wave_numbers();
    let [x0, y0] = bbox.min;
    match name {
        "sine" => {
            let e = move |x: [f64; 2]| {
                let (sx, cx) = (a * (x[0] - x0)).sin_cos();
                let (sy, cy) = (b * (x[1] - y0)).sin_cos();
                [sy + a * cx * sy, sx + b * sx * cy]
            };
            let j = move |x: [f64; 2]| {
                let v = e(x);
                let (sx, sy) = ((a * (x[0] - x0)).sin(), (b * (x[1] - y0)).sin());
                [b * b * sy - omega * omega * v[0], a * a * sx - omega * omega * v[1]]
            };
            Ok(VectorCase { source: Box::new(j), exact: Some(Box::new(e)) })
        }
        "zero" => Ok(VectorCase { source: Box::new(|_| [0.0; 2]), exact: Some(Box::new(|_| [0.0; 2])) }),
        other => Err(unknown("maxwell-th", other, &["sine", "zero"])),
    }
}

/// `u = (cos πx sin πy, sin πx cos πy)` with `div u = −2π sin πx sin πy`.
pub fn weak_div() -> VectorCase {
    VectorCase {
        source: Box::new(|x| {
            let (sx, cx) = (PI * x[0]).sin_cos();
            let (sy, cy) = (PI * x[1]).sin_cos();
            [cx * sy, sx * cy]
        }),
        exact: None,
    }
}

pub fn weak_div_exact(x: [f64; 2]) -> f64 {
    -2.0 * PI * (PI * x[0]).sin() * (PI * x[1]).sin()
}

/// `f = cos πx cos πy` with the rotated gradient `(∂_y f, −∂_x f) = (−π cos πx sin πy, π sin πx cos πy)`.
pub fn weak_curl() -> ScalarCase {
    ScalarCase { source: Box::new(|x| (PI * x[0]).cos() * (PI * x[1]).cos()), exact: None }
}

pub fn weak_curl_exact(x: [f64; 2]) -> [f64; 2] {
    let (sx, cx) = (PI * x[0]).sin_cos();
    let (sy, cy) = (PI * x[1]).sin_cos();
    [-PI * cx * sy, PI * sx * cy]
}

/// Initial data of a time-domain run: the primal field and the dual one.
pub enum InitialData {
    Maxwell { e0: Vector, b0: Scalar },
    Helmholtz { phi0: Scalar, u0: Vector },
}

/// `pulse`: `E₀ = (y − c_y, −(x − c_x)) g/w²` with `g = exp(−|x − c|²/2w²)` and
/// `B₀ = curl E₀ = (g/w²)(|x − c|²/w² − 2)`.
pub fn td_maxwell(name: &str, width: f64, center: [f64; 2]) -> Result<InitialData> {
    match name {
        "pulse" => {
            let w2 = width * width;
            let g = move |x: [f64; 2]| {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                (r2, (-r2 / (2.0 * w2)).exp())
            };
            Ok(InitialData::Maxwell {
                e0: Box::new(move |x| {
                    let (_, gx) = g(x);
                    [(x[1] - center[1]) * gx / w2, -(x[0] - center[0]) * gx / w2]
                }),
                b0: Box::new(move |x| {
                    let (r2, gx) = g(x);
                    gx / w2 * (r2 / w2 - 2.0)
                }),
            })
        }
        other => Err(unknown("td-maxwell", other, &["pulse"])),
    }
}

/// `pulse`: `φ₀ = g` and `U₀ = 0`. `standing`: the lowest mixed mode of the box,
/// `sin aX sin bY` under homogeneous conditions and `cos aX cos bY` otherwise, with angular
/// frequency `√(a² + b²)`.
pub fn td_helmholtz(
    name: &str,
    width: f64,
    center: [f64; 2],
    bbox: BoundingBox,
    bc: BoundaryCondition,
) -> Result<InitialData> {
    let zero: Vector = Box::new(|_| [0.0; 2]);
    match name {
        "pulse" => {
            let w2 = width * width;
            let phi0 = move |x: [f64; 2]| {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                (-r2 / (2.0 * w2)).exp()
            };
            Ok(InitialData::Helmholtz { phi0: Box::new(phi0), u0: zero })
        }
        "standing" => {
            let (a, b) = bbox.wave_numbers();
            let [x0, y0] = bbox.min;
            let phi0: Scalar = match bc {
                BoundaryCondition::Homogeneous => Box::new(move |x| (a * (x[0] - x0)).sin() * (b * (x[1] - y0)).sin()),
                BoundaryCondition::None => Box::new(move |x| (a * (x[0] - x0)).cos() * (b * (x[1] - y0)).cos()),
            };
            Ok(InitialData::Helmholtz { phi0, u0: zero })
        }
        other => Err(unknown("td-helmholtz", other, &["pulse", "standing"])),
    }
}
