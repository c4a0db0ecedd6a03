//! Multipatch domains: analytic patch mappings, interface topology and domain presets.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent float methods exist only when std is linked
use num_traits::Float;

use crate::error::{param, Error, Result};
use crate::splines::KnotVector;

/// 2×2 matrix stored row-major: `m[i][j] = ∂F_i/∂x̂_j`.
pub type Mat2 = [[f64; 2]; 2];

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn inv2(m: &Mat2) -> Mat2 {
    let d = det2(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

/// Smooth map `F: [0,1]² → ℝ²` of one patch.
#[derive(Debug, Clone, PartialEq)]
pub enum PatchMapping {
    /// `F(x̂) = origin + A x̂`.
    Affine { origin: [f64; 2], matrix: Mat2 },
    /// Bilinear blend of the images of `(0,0), (1,0), (0,1), (1,1)`.
    Bilinear { corners: [[f64; 2]; 4] },
    /// Annulus section: radius `r_inner + s (r_outer − r_inner)`, angle `angle_start + t (angle_end − angle_start)`.
    Polar { center: [f64; 2], r_inner: f64, r_outer: f64, angle_start: f64, angle_end: f64 },
}

impl PatchMapping {
    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::Affine { origin: [x0, y0], matrix: [[x1 - x0, 0.0], [0.0, y1 - y0]] }
    }

    pub fn map(&self, s: f64, t: f64) -> [f64; 2] {
        match self {
            Self::Affine { origin, matrix: a } => {
                [origin[0] + a[0][0] * s + a[0][1] * t, origin[1] + a[1][0] * s + a[1][1] * t]
            }
            Self::Bilinear { corners: c } => {
                let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t];
                let mut x = [0.0; 2];
                for (wi, ci) in w.iter().zip(c) {
                    x[0] += wi * ci[0];
                    x[1] += wi * ci[1];
                }
                x
            }
            Self::Polar { center, r_inner, r_outer, angle_start, angle_end } => {
                let rho = r_inner + s * (r_outer - r_inner);
                let phi = angle_start + t * (angle_end - angle_start);
                [center[0] + rho * phi.cos(), center[1] + rho * phi.sin()]
            }
        }
    }

    pub fn jacobian(&self, s: f64, t: f64) -> Mat2 {
        match self {
            Self::Affine { matrix, .. } => *matrix,
            Self::Bilinear { corners: c } => {
                let ds = [-(1.0 - t), 1.0 - t, -t, t];
                let dt = [-(1.0 - s), -s, 1.0 - s, s];
                let mut m = [[0.0; 2]; 2];
                for i in 0..4 {
                    for d in 0..2 {
                        m[d][0] += ds[i] * c[i][d];
                        m[d][1] += dt[i] * c[i][d];
                    }
                }
                m
            }
            Self::Polar { r_inner, r_outer, angle_start, angle_end, .. } => {
                let dr = r_outer - r_inner;
                let da = angle_end - angle_start;
                let rho = r_inner + s * dr;
                let phi = angle_start + t * da;
                let (sn, cs) = (phi.sin(), phi.cos());
                [[dr * cs, -rho * da * sn], [dr * sn, rho * da * cs]]
            }
        }
    }

    pub fn det(&self, s: f64, t: f64) -> f64 {
        det2(&self.jacobian(s, t))
    }

    /// Logical preimage of `x`, or `None` when `x` is not in the patch.
    /// Newton iteration with clamping to the unit square, tolerance 1e−12, at most 50 steps.
    pub fn inverse(&self, x: [f64; 2]) -> Option<[f64; 2]> {
        let mut u = [0.5, 0.5];
        let scale = {
            let a = self.map(0.0, 0.0);
            let b = self.map(1.0, 1.0);
            ((a[0] - b[0]).abs() + (a[1] - b[1]).abs()).max(1.0)
        };
        for _ in 0..50 {
            let f = self.map(u[0], u[1]);
            let r = [x[0] - f[0], x[1] - f[1]];
            if r[0].abs() + r[1].abs() <= 1e-12 * scale {
                return Some(u);
            }
            let ji = inv2(&self.jacobian(u[0], u[1]));
            u[0] = (u[0] + ji[0][0] * r[0] + ji[0][1] * r[1]).clamp(0.0, 1.0);
            u[1] = (u[1] + ji[1][0] * r[0] + ji[1][1] * r[1]).clamp(0.0, 1.0);
        }
        let f = self.map(u[0], u[1]);
        ((x[0] - f[0]).abs() + (x[1] - f[1]).abs() <= 1e-10 * scale).then_some(u)
    }
}

/// One of the four sides of the logical unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// `x̂₂ = 0`
    South,
    /// `x̂₂ = 1`
    North,
    /// `x̂₁ = 0`
    West,
    /// `x̂₁ = 1`
    East,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::South, Side::North, Side::West, Side::East];

    /// Logical axis running along the side.
    pub fn parallel_axis(self) -> usize {
        match self {
            Side::South | Side::North => 0,
            Side::West | Side::East => 1,
        }
    }

    pub fn perpendicular_axis(self) -> usize {
        1 - self.parallel_axis()
    }

    /// True for sides at logical coordinate 1.
    pub fn at_far_end(self) -> bool {
        matches!(self, Side::North | Side::East)
    }

    /// Logical point at parameter `t` along the side.
    pub fn point(self, t: f64) -> [f64; 2] {
        match self {
            Side::South => [t, 0.0],
            Side::North => [t, 1.0],
            Side::West => [0.0, t],
            Side::East => [1.0, t],
        }
    }

    /// Corners at parameter 0 and 1 along the side.
    pub fn corners(self) -> [Corner; 2] {
        let p = self.point(0.0);
        let q = self.point(1.0);
        [Corner([p[0] == 1.0, p[1] == 1.0]), Corner([q[0] == 1.0, q[1] == 1.0])]
    }
}

/// Corner of the unit square; `Corner([a, b])` is the logical point `(a as f64, b as f64)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Corner(pub [bool; 2]);

impl Corner {
    pub fn point(self) -> [f64; 2] {
        [self.0[0] as u8 as f64, self.0[1] as u8 as f64]
    }

    /// The two sides meeting at this corner.
    pub fn sides(self) -> [Side; 2] {
        let horizontal = if self.0[1] { Side::North } else { Side::South };
        let vertical = if self.0[0] { Side::East } else { Side::West };
        [horizontal, vertical]
    }
}

/// A patch: its mapping and the knot vectors of the two logical directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub mapping: PatchMapping,
    pub knots: [KnotVector; 2],
}

impl Patch {
    pub fn degree(&self) -> usize {
        self.knots[0].degree()
    }

    /// Knot vector along a side.
    pub fn side_knots(&self, side: Side) -> &KnotVector {
        &self.knots[side.parallel_axis()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideRef {
    pub patch: usize,
    pub side: Side,
}

/// An edge of the patch decomposition. Interior edges have a coarse side `minus` and a fine
/// side `plus`; boundary edges have only `minus`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub minus: SideRef,
    pub plus: Option<SideRef>,
    /// Whether the plus side's parallel coordinate runs opposite to the minus side's.
    pub reversed: bool,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.plus.is_none()
    }

    pub fn patches(&self) -> impl Iterator<Item = usize> + '_ {
        core::iter::once(self.minus.patch).chain(self.plus.map(|s| s.patch))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexPatch {
    pub patch: usize,
    pub corner: Corner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub point: [f64; 2],
    /// Incident patches ordered by patch id.
    pub patches: Vec<VertexPatch>,
    pub boundary: bool,
}

/// Per-side view of an interior edge in the edge-local frame: parallel index `j` along the
/// edge (in the coarse side's orientation) and perpendicular index `m` counted from the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideFrame {
    pub patch: usize,
    pub side: Side,
    pub parallel_axis: usize,
    pub perpendicular_axis: usize,
    pub reversed: bool,
}

impl SideFrame {
    /// Tensor index `(i₁, i₂)` of the local pair `(j, m)` for a tensor space of shape `dims`.
    pub fn tensor_index(&self, j: usize, m: usize, dims: [usize; 2]) -> [usize; 2] {
        let jp = if self.reversed { dims[self.parallel_axis] - 1 - j } else { j };
        let mp = if self.side.at_far_end() { dims[self.perpendicular_axis] - 1 - m } else { m };
        let mut out = [0; 2];
        out[self.parallel_axis] = jp;
        out[self.perpendicular_axis] = mp;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeFrame {
    pub minus: SideFrame,
    pub plus: SideFrame,
}

/// Patches together with their edge and vertex adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipatchTopology {
    pub patches: Vec<Patch>,
    pub edges: Vec<Edge>,
    pub vertices: Vec<Vertex>,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Parallel knot vector of a side, mirrored when `reversed`.
fn trace_knots(patch: &Patch, side: Side, reversed: bool) -> KnotVector {
    let k = patch.side_knots(side);
    if reversed {
        k.reversed()
    } else {
        k.clone()
    }
}

impl MultipatchTopology {
    pub fn degree(&self) -> usize {
        self.patches[0].degree()
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| !e.is_boundary())
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.is_boundary())
    }

    /// Edge containing a given patch side.
    pub fn edge_of(&self, patch: usize, side: Side) -> &Edge {
        self.edges
            .iter()
            .find(|e| {
                (e.minus.patch == patch && e.minus.side == side)
                    || e.plus.is_some_and(|p| p.patch == patch && p.side == side)
            })
            .expect("every patch side belongs to an edge")
    }

    /// Vertex at a given patch corner.
    pub fn vertex_of(&self, patch: usize, corner: Corner) -> &Vertex {
        self.vertices
            .iter()
            .find(|v| v.patches.iter().any(|vp| vp.patch == patch && vp.corner == corner))
            .expect("every patch corner belongs to a vertex")
    }

    /// Patch containing a physical point and the logical coordinates there.
    pub fn locate(&self, x: [f64; 2]) -> Result<(usize, [f64; 2])> {
        self.patches
            .iter()
            .enumerate()
            .find_map(|(k, p)| p.mapping.inverse(x).map(|u| (k, u)))
            .ok_or(Error::Lookup(x[0], x[1]))
    }

    /// Same topology with every mapping replaced.
    pub fn with_mappings(&self, mappings: Vec<PatchMapping>) -> Result<Self> {
        if mappings.len() != self.patches.len() {
            return Err(param("one mapping per patch is required"));
        }
        let mut out = self.clone();
        for (p, m) in out.patches.iter_mut().zip(mappings) {
            p.mapping = m;
        }
        Ok(out)
    }
}

/// Edge-local frame of an interior edge.
pub fn edge_local_frame(edge: &Edge) -> Result<EdgeFrame> {
    let plus = edge.plus.ok_or_else(|| Error::Usage(format!("edge {} is a boundary edge", edge.id)))?;
    let frame = |s: SideRef, reversed: bool| SideFrame {
        patch: s.patch,
        side: s.side,
        parallel_axis: s.side.parallel_axis(),
        perpendicular_axis: s.side.perpendicular_axis(),
        reversed,
    };
    Ok(EdgeFrame { minus: frame(edge.minus, false), plus: frame(plus, edge.reversed) })
}

/// Frame of a boundary edge, treating its only patch as the coarse side.
pub fn boundary_frame(edge: &Edge) -> SideFrame {
    SideFrame {
        patch: edge.minus.patch,
        side: edge.minus.side,
        parallel_axis: edge.minus.side.parallel_axis(),
        perpendicular_axis: edge.minus.side.perpendicular_axis(),
        reversed: false,
    }
}

/// Finds edges, vertices, orientations and coarse/fine roles of a list of patches.
pub fn build_topology(patches: Vec<Patch>) -> Result<MultipatchTopology> {
    if patches.is_empty() {
        return Err(param("a domain needs at least one patch"));
    }
    let p = patches[0].degree();
    for (k, patch) in patches.iter().enumerate() {
        if patch.knots.iter().any(|kv| kv.degree() != p) {
            return Err(param(format!("patch {k} has a degree different from {p}")));
        }
        if patch.knots.iter().any(|kv| kv.num_cells() < 3) {
            return Err(param(format!("patch {k} has fewer than 3 cells in some direction")));
        }
        for i in 0..=20 {
            for j in 0..=20 {
                if !(patch.mapping.det(i as f64 / 20.0, j as f64 / 20.0) > 0.0) {
                    return Err(Error::Geometry(format!("patch {k} has a non-positive Jacobian")));
                }
            }
        }
    }
    let scale = patches
        .iter()
        .flat_map(|p| [p.mapping.map(0.0, 0.0), p.mapping.map(1.0, 1.0), p.mapping.map(1.0, 0.0)])
        .fold(1.0f64, |m, x| m.max(x[0].abs()).max(x[1].abs()));
    let tol = 1e-10 * scale;
    let image = |r: SideRef, t: f64| {
        let u = r.side.point(t);
        patches[r.patch].mapping.map(u[0], u[1])
    };

    let sides: Vec<SideRef> =
        (0..patches.len()).flat_map(|patch| Side::ALL.into_iter().map(move |side| SideRef { patch, side })).collect();
    let mut matched = vec![false; sides.len()];
    let mut edges = Vec::new();
    for a in 0..sides.len() {
        if matched[a] {
            continue;
        }
        let sa = sides[a];
        let (a0, a1) = (image(sa, 0.0), image(sa, 1.0));
        let mut partner = None;
        for b in a + 1..sides.len() {
            let sb = sides[b];
            if matched[b] || sb.patch == sa.patch {
                continue;
            }
            let (b0, b1) = (image(sb, 0.0), image(sb, 1.0));
            let reversed = if dist(a0, b0) <= tol && dist(a1, b1) <= tol {
                false
            } else if dist(a0, b1) <= tol && dist(a1, b0) <= tol {
                true
            } else {
                continue;
            };
            let conforming = (0..50).all(|i| {
                let t = (i as f64 + 0.5) / 50.0;
                dist(image(sa, t), image(sb, if reversed { 1.0 - t } else { t })) <= tol
            });
            if !conforming {
                return Err(Error::Geometry(format!(
                    "patches {} and {} share side endpoints but not the side itself",
                    sa.patch, sb.patch
                )));
            }
            partner = Some((b, reversed));
            break;
        }
        matched[a] = true;
        let Some((b, reversed)) = partner else {
            edges.push(Edge { id: 0, minus: sa, plus: None, reversed: false });
            continue;
        };
        matched[b] = true;
        let sb = sides[b];
        let ka = trace_knots(&patches[sa.patch], sa.side, false);
        let kb = trace_knots(&patches[sb.patch], sb.side, reversed);
        let a_is_minus = if ka.approx_eq(&kb) {
            sa.patch < sb.patch
        } else if ka.is_nested_in(&kb) {
            true
        } else if kb.is_nested_in(&ka) {
            false
        } else {
            return Err(Error::NotNested(format!(
                "trace spaces of patches {} and {} are not nested",
                sa.patch, sb.patch
            )));
        };
        let (minus, plus) = if a_is_minus { (sa, sb) } else { (sb, sa) };
        edges.push(Edge { id: 0, minus, plus: Some(plus), reversed });
    }
    // Interior edges first, then boundary edges, each in discovery order.
    edges.sort_by_key(|e| e.is_boundary());
    for (i, e) in edges.iter_mut().enumerate() {
        e.id = i;
    }

    // A boundary side touching another patch in its interior is a hanging interface.
    for e in edges.iter().filter(|e| e.is_boundary()) {
        for t in [0.25, 0.5, 0.75] {
            let x = image(e.minus, t);
            for (k, other) in patches.iter().enumerate() {
                if k == e.minus.patch {
                    continue;
                }
                if other.mapping.inverse(x).is_some() {
                    return Err(Error::Geometry(format!(
                        "patches {} and {} meet along a non-conforming interface",
                        e.minus.patch, k
                    )));
                }
            }
        }
    }

    let mut vertices: Vec<Vertex> = Vec::new();
    for (k, patch) in patches.iter().enumerate() {
        for c in [[false, false], [true, false], [false, true], [true, true]] {
            let corner = Corner(c);
            let u = corner.point();
            let x = patch.mapping.map(u[0], u[1]);
            match vertices.iter_mut().find(|v| dist(v.point, x) <= tol) {
                Some(v) => v.patches.push(VertexPatch { patch: k, corner }),
                None => vertices.push(Vertex {
                    id: vertices.len(),
                    point: x,
                    patches: vec![VertexPatch { patch: k, corner }],
                    boundary: false,
                }),
            }
        }
    }
    let topo_edges = edges;
    for v in vertices.iter_mut() {
        v.boundary = v.patches.iter().any(|vp| {
            vp.corner.sides().iter().any(|&s| {
                topo_edges.iter().any(|e| e.is_boundary() && e.minus.patch == vp.patch && e.minus.side == s)
            })
        });
    }
    Ok(MultipatchTopology { patches, edges: topo_edges, vertices })
}

/// Patch mapping plus per-direction cell counts; a [`DomainSpec`] becomes a topology once a
/// degree is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSpec {
    pub mapping: PatchMapping,
    pub cells: [usize; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub name: String,
    pub patches: Vec<PatchSpec>,
}

impl DomainSpec {
    /// Uniform knot vectors of the given degree on every patch.
    pub fn build(&self, degree: usize) -> Result<MultipatchTopology> {
        let patches = self
            .patches
            .iter()
            .map(|ps| {
                Ok(Patch {
                    mapping: ps.mapping.clone(),
                    knots: [KnotVector::uniform(degree, ps.cells[0])?, KnotVector::uniform(degree, ps.cells[1])?],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        build_topology(patches)
    }

    /// Same layout with every cell count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let mut out = self.clone();
        for p in &mut out.patches {
            p.cells = [p.cells[0] * factor, p.cells[1] * factor];
        }
        out
    }
}

/// Dyadic refinement pattern of a rectangular patch grid; levels `θ` give `2^θ` times the base cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refinement {
    Uniform,
    /// Refine the middle patch of a grid with odd patch counts.
    Center(u32),
    /// Refine every patch except the middle one.
    Surround(u32),
    /// Refine patches with odd `i + j`.
    Checkerboard(u32),
    /// One level per patch, in patch order.
    Explicit(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetParams {
    pub nx: usize,
    pub ny: usize,
    pub cells: usize,
    pub refinement: Refinement,
    pub r_inner: f64,
    pub r_outer: f64,
    pub level: u32,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self { nx: 2, ny: 2, cells: 4, refinement: Refinement::Uniform, r_inner: 0.5, r_outer: 1.0, level: 0 }
    }
}

pub const PRESET_NAMES: [&str; 6] =
    ["unit-square-grid", "square-pi-grid", "curved-L-shape", "L-corner-refined", "checkerboard", "three-patch"];

fn check_level(theta: u32) -> Result<usize> {
    if theta > 3 {
        return Err(param("refinement levels are limited to 0..=3"));
    }
    Ok(1 << theta)
}

fn grid_levels(nx: usize, ny: usize, refinement: &Refinement) -> Result<Vec<u32>> {
    let n = nx * ny;
    let center = || {
        if nx % 2 == 1 && ny % 2 == 1 {
            Ok((ny / 2) * nx + nx / 2)
        } else {
            Err(param("center refinement needs odd patch counts"))
        }
    };
    Ok(match refinement {
        Refinement::Uniform => vec![0; n],
        Refinement::Center(t) => {
            let c = center()?;
            (0..n).map(|k| if k == c { *t } else { 0 }).collect()
        }
        Refinement::Surround(t) => {
            let c = center()?;
            (0..n).map(|k| if k == c { 0 } else { *t }).collect()
        }
        Refinement::Checkerboard(t) => (0..n).map(|k| if (k % nx + k / nx) % 2 == 1 { *t } else { 0 }).collect(),
        Refinement::Explicit(levels) => {
            if levels.len() != n {
                return Err(param(format!("expected {n} refinement levels, got {}", levels.len())));
            }
            levels.clone()
        }
    })
}

fn rect_grid(name: &str, length: f64, params: &PresetParams) -> Result<DomainSpec> {
    let (nx, ny) = (params.nx, params.ny);
    if nx == 0 || ny == 0 {
        return Err(param("patch grid must be non-empty"));
    }
    let levels = grid_levels(nx, ny, &params.refinement)?;
    let mut patches = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let f = check_level(levels[j * nx + i])?;
            let (hx, hy) = (length / nx as f64, length / ny as f64);
            patches.push(PatchSpec {
                mapping: PatchMapping::rectangle(i as f64 * hx, j as f64 * hy, (i + 1) as f64 * hx, (j + 1) as f64 * hy),
                cells: [params.cells * f, params.cells * f],
            });
        }
    }
    Ok(DomainSpec { name: name.into(), patches })
}

/// Named domain layouts.
///
/// * `unit-square-grid`, `square-pi-grid`: `nx × ny` rectangles tiling `[0,1]²` or `[0,π]²`.
/// * `checkerboard`: square grid on `[0,π]²` with the patches of odd `i + j` refined by `level`.
/// * `curved-L-shape`: three annulus sections covering angles `0..3π/2`; `level` refines the middle one.
/// * `L-corner-refined`: twelve squares of side 0.5 covering `[−1,1]²` minus `(0,1)×(−1,0)`, refined
///   by `level − ring` where `ring` is the distance in patches from the reentrant corner.
/// * `three-patch`: a regular hexagon split into three rhombi meeting at its center.
pub fn preset_domain(name: &str, params: &PresetParams) -> Result<DomainSpec> {
    match name {
        "unit-square-grid" => rect_grid(name, 1.0, params),
        "square-pi-grid" => rect_grid(name, PI, params),
        "checkerboard" => {
            let mut p = params.clone();
            p.ny = p.nx;
            p.refinement = Refinement::Checkerboard(params.level);
            rect_grid(name, PI, &p)
        }
        "curved-L-shape" => {
            if !(0.0 < params.r_inner && params.r_inner < params.r_outer) {
                return Err(param("curved L-shape needs 0 < r_inner < r_outer"));
            }
            let patches = (0..3)
                .map(|k| {
                    let f = if k == 1 { check_level(params.level)? } else { 1 };
                    Ok(PatchSpec {
                        mapping: PatchMapping::Polar {
                            center: [0.0, 0.0],
                            r_inner: params.r_inner,
                            r_outer: params.r_outer,
                            angle_start: k as f64 * PI / 2.0,
                            angle_end: (k + 1) as f64 * PI / 2.0,
                        },
                        cells: [params.cells * f, params.cells * f],
                    })
                })
                .collect::<Result<_>>()?;
            Ok(DomainSpec { name: name.into(), patches })
        }
        "L-corner-refined" => {
            let mut patches = Vec::new();
            for iy in 0..4 {
                for ix in 0..4 {
                    let (x0, y0) = (-1.0 + 0.5 * ix as f64, -1.0 + 0.5 * iy as f64);
                    if x0 >= 0.0 && y0 < 0.0 {
                        continue;
                    }
                    let dx = if ix >= 2 { ix - 2 } else { 1 - ix };
                    let dy = if iy >= 2 { iy - 2 } else { 1 - iy };
                    let ring = dx.max(dy) as u32;
                    let f = check_level(params.level.saturating_sub(ring))?;
                    patches.push(PatchSpec {
                        mapping: PatchMapping::rectangle(x0, y0, x0 + 0.5, y0 + 0.5),
                        cells: [params.cells * f, params.cells * f],
                    });
                }
            }
            Ok(DomainSpec { name: name.into(), patches })
        }
        "three-patch" => {
            let v = |j: usize| {
                let a = j as f64 * PI / 3.0;
                [a.cos(), a.sin()]
            };
            let levels = match &params.refinement {
                Refinement::Explicit(l) if l.len() == 3 => l.clone(),
                Refinement::Uniform => vec![0; 3],
                _ => return Err(param("three-patch accepts uniform or three explicit levels")),
            };
            let patches = (0..3)
                .map(|k| {
                    let (a, b) = (v(2 * k), v(2 * k + 2));
                    let f = check_level(levels[k])?;
                    Ok(PatchSpec {
                        mapping: PatchMapping::Affine { origin: [0.0, 0.0], matrix: [[a[0], b[0]], [a[1], b[1]]] },
                        cells: [params.cells * f, params.cells * f],
                    })
                })
                .collect::<Result<_>>()?;
            Ok(DomainSpec { name: name.into(), patches })
        }
        other => Err(Error::Usage(format!("unknown preset `{other}`"))),
    }
}
