//! Dense and sparse linear algebra kernels.

pub mod dense;
pub mod eigen;
pub mod factor;
pub mod sparse;

pub use dense::DenseMatrix;
pub use eigen::{generalized_eigs, generalized_eigs_with, EigenMethod, EigenOptions, EigenResult};
pub use factor::{conjugate_gradient, rcm_ordering, solve_general, solve_spd, SparseFactorization};
pub use sparse::{SparseMatrix, TripletBuilder};
