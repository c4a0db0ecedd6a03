//! Weak (adjoint) differential operators, filtered projections and jump stabilization.
//!
//! With `ℙ` the conforming projection and `M` the broken mass matrices, the
//! weak divergence and weak curl act on coefficients as
//!
//! ```text
//! D̃ = −(M⁰)⁻¹ (𝔾ℙ⁰)ᵀ M¹        C̃ = (M¹)⁻¹ (𝓒ℙ¹)ᵀ M²
//! ```
//!
//! and satisfy `⟨φ, D̃u⟩ = −⟨grad ℙ⁰φ, u⟩` and `⟨v, C̃w⟩ = ⟨curl ℙ¹v, w⟩`.
//! The filtered projection `Π̃ℓ = (ℙℓ)* Qℓ` reduces to `(Mℓ)⁻¹ (ℙℓ)ᵀ 𝐟`
//! where `𝐟` is the load vector of the projected function.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::conforming::{assemble_p, BoundaryCondition};
use crate::derham::{
    curl_matrix, gradient_matrix, load_scalar, load_vector, mass_matrix, DeRhamSpaces, FemField, MassSolver, ScalarFn,
    VectorFn,
};
use crate::error::{param, shape};
use crate::linalg::SparseMatrix;
use crate::Result;

/// Moment order actually used by `ℙℓ` when `r` is requested for the whole sequence.
///
/// `ℙ¹` preserves moments up to order `p`, so requests of `p + 1` are capped there.
pub fn effective_order(level: usize, r: usize, degree: usize) -> usize {
    if level == 1 {
        r.min(degree)
    } else {
        r
    }
}

/// The assembled discrete sequence for one choice of moment order and boundary condition.
#[derive(Debug, Clone)]
pub struct DiscreteComplex {
    pub spaces: Arc<DeRhamSpaces>,
    pub order: usize,
    pub bc: BoundaryCondition,
    pub grad: SparseMatrix,
    pub curl: SparseMatrix,
    pub mass: [SparseMatrix; 3],
    pub p0: SparseMatrix,
    pub p1: SparseMatrix,
}

impl DiscreteComplex {
    pub fn assemble(spaces: &Arc<DeRhamSpaces>, r: usize, bc: BoundaryCondition) -> Result<Self> {
        let p = spaces.degree();
        Ok(Self {
            spaces: spaces.clone(),
            order: r,
            bc,
            grad: gradient_matrix(spaces)?,
            curl: curl_matrix(spaces)?,
            mass: [mass_matrix(spaces, 0)?, mass_matrix(spaces, 1)?, mass_matrix(spaces, 2)?],
            p0: assemble_p(spaces, 0, effective_order(0, r, p), bc)?.matrix,
            p1: assemble_p(spaces, 1, effective_order(1, r, p), bc)?.matrix,
        })
    }

    /// `𝔾ℙ⁰`.
    pub fn grad_conforming(&self) -> Result<SparseMatrix> {
        self.grad.matmul(&self.p0)
    }

    /// `𝓒ℙ¹`.
    pub fn curl_conforming(&self) -> Result<SparseMatrix> {
        self.curl.matmul(&self.p1)
    }

    /// `ℙℓ` for `ℓ ∈ {0, 1}`.
    pub fn projection(&self, level: usize) -> Result<&SparseMatrix> {
        match level {
            0 => Ok(&self.p0),
            1 => Ok(&self.p1),
            _ => Err(param("conforming projections exist for levels 0 and 1")),
        }
    }

    /// `(𝕀 − ℙℓ)ᵀ Mℓ (𝕀 − ℙℓ)`.
    pub fn jump_stabilization(&self, level: usize) -> Result<SparseMatrix> {
        jump_stabilization(self.projection(level)?, &self.mass[level])
    }
}

/// Symmetric form `(𝕀 − ℙ)ᵀ M (𝕀 − ℙ)` whose kernel is the range of `ℙ`.
pub fn jump_stabilization(p: &SparseMatrix, mass: &SparseMatrix) -> Result<SparseMatrix> {
    let n = p.nrows();
    if p.ncols() != n || mass.nrows() != n || mass.ncols() != n {
        return Err(shape("projection and mass matrix must be square of equal size"));
    }
    let q = SparseMatrix::identity(n).add(1.0, p, -1.0)?;
    let s = q.transpose().matmul(&mass.matmul(&q)?)?;
    // Symmetrize to remove rounding asymmetry of the triple product.
    s.add(0.5, &s.transpose(), 0.5)
}

/// Which adjoint a [`WeakOperator`] realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakKind {
    /// `V¹ → V⁰`, adjoint of `−grad ℙ⁰`.
    Div,
    /// `V² → V¹`, adjoint of `curl ℙ¹`.
    Curl,
}

/// Stores `sign · (𝔸ℙ)ᵀ M` together with the mass solver of the target space.
#[derive(Debug, Clone)]
pub struct WeakOperator {
    pub kind: WeakKind,
    pub bc: BoundaryCondition,
    pub sign: f64,
    transposed: SparseMatrix,
    solver: MassSolver,
}

impl WeakOperator {
    /// Weak divergence. `bc = Homogeneous` builds it from `ℙ⁰₀` and approximates `div u`
    /// for any `u`; `bc = None` builds it from `ℙ⁰` and pairs with fields in `H₀(div)`.
    pub fn div(spaces: &Arc<DeRhamSpaces>, r: usize, bc: BoundaryCondition) -> Result<Self> {
        let p0 = assemble_p(spaces, 0, r, bc)?.matrix;
        let gp = gradient_matrix(spaces)?.matmul(&p0)?;
        Self::from_parts(spaces, WeakKind::Div, bc, &gp, &mass_matrix(spaces, 1)?)
    }

    /// Weak curl, the rotated-gradient adjoint of `curl ℙ¹`. The variants pair as for [`Self::div`]
    /// and `r` is capped as in [`effective_order`].
    pub fn curl(spaces: &Arc<DeRhamSpaces>, r: usize, bc: BoundaryCondition) -> Result<Self> {
        let p1 = assemble_p(spaces, 1, effective_order(1, r, spaces.degree()), bc)?.matrix;
        let cp = curl_matrix(spaces)?.matmul(&p1)?;
        Self::from_parts(spaces, WeakKind::Curl, bc, &cp, &mass_matrix(spaces, 2)?)
    }

    /// Reuses matrices of an assembled sequence.
    pub fn from_complex(c: &DiscreteComplex, kind: WeakKind) -> Result<Self> {
        match kind {
            WeakKind::Div => Self::from_parts(&c.spaces, kind, c.bc, &c.grad_conforming()?, &c.mass[1]),
            WeakKind::Curl => Self::from_parts(&c.spaces, kind, c.bc, &c.curl_conforming()?, &c.mass[2]),
        }
    }

    fn from_parts(
        spaces: &DeRhamSpaces,
        kind: WeakKind,
        bc: BoundaryCondition,
        strong: &SparseMatrix,
        source_mass: &SparseMatrix,
    ) -> Result<Self> {
        let (sign, target) = match kind {
            WeakKind::Div => (-1.0, 0),
            WeakKind::Curl => (1.0, 1),
        };
        let transposed = strong.transpose().matmul(source_mass)?.scaled(sign);
        let solver = MassSolver::new(spaces, target)?;
        Ok(Self { kind, bc, sign, transposed, solver })
    }

    pub fn source_level(&self) -> usize {
        match self.kind {
            WeakKind::Div => 1,
            WeakKind::Curl => 2,
        }
    }

    pub fn target_level(&self) -> usize {
        self.source_level() - 1
    }

    /// `sign · (𝔸ℙ)ᵀ M`, the right-hand side of the mass solve.
    pub fn rhs_matrix(&self) -> &SparseMatrix {
        &self.transposed
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.transposed.ncols() {
            return Err(shape("input length differs from the source space dimension"));
        }
        self.solver.solve(&self.transposed.mul_vec(u)?)
    }

    pub fn apply_field(&self, u: &FemField) -> Result<FemField> {
        if u.level != self.source_level() {
            return Err(param("field level does not match the operator's source space"));
        }
        FemField::new(u.spaces.clone(), self.target_level(), self.apply(&u.coeffs)?)
    }
}

/// Coefficients `(Mℓ)⁻¹ (ℙℓ)ᵀ 𝐟` from a load vector; level 2 has no projection.
pub fn filtered_coefficients(
    spaces: &DeRhamSpaces,
    level: usize,
    projection: Option<&SparseMatrix>,
    load: &[f64],
) -> Result<Vec<f64>> {
    let rhs = match projection {
        Some(p) => p.mul_vec_transpose(load)?,
        None => load.to_vec(),
    };
    MassSolver::new(spaces, level)?.solve(&rhs)
}

/// `Π̃ℓ v` for a scalar field on level 0 or 2.
pub fn filtered_projection_scalar(
    spaces: &Arc<DeRhamSpaces>,
    level: usize,
    r: usize,
    bc: BoundaryCondition,
    v: ScalarFn<'_>,
) -> Result<FemField> {
    let f = load_scalar(spaces, level, v)?;
    let p = if level == 0 { Some(assemble_p(spaces, 0, r, bc)?.matrix) } else { None };
    let c = filtered_coefficients(spaces, level, p.as_ref(), &f)?;
    FemField::new(spaces.clone(), level, c)
}

/// `Π̃¹ v` for a vector field. Orders above `p` are capped as in [`effective_order`].
pub fn filtered_projection_vector(
    spaces: &Arc<DeRhamSpaces>,
    r: usize,
    bc: BoundaryCondition,
    v: VectorFn<'_>,
) -> Result<FemField> {
    let f = load_vector(spaces, v)?;
    let p = assemble_p(spaces, 1, effective_order(1, r, spaces.degree()), bc)?.matrix;
    let c = filtered_coefficients(spaces, 1, Some(&p), &f)?;
    FemField::new(spaces.clone(), 1, c)
}
