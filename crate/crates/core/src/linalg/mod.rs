//! Dense matrices, centering, whitening and projections.

mod data;
mod eigen;
mod matrix;

pub use data::{
    center_rows, prepare, residual_project, whiten, whiten_reduced, DataMatrix, WhiteningRecord,
    RANK_TOL,
};
pub use eigen::{
    inv_sqrt_spd, principal_angles, qr_q, singular_values, sym_eigen, sym_orthonormalize, SymEigen,
};
pub use matrix::{axpy, dot, Matrix};
