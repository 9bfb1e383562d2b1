//! Unmixing engines for whitened data.
//!
//! [`fastica_extract`] finds the `q` most non-Gaussian directions under the
//! logistic contrast by symmetric fixed-point iteration; with `q = T` it is
//! plain noise-free ICA. [`fobi_unmix`] is the closed-form fourth-order
//! alternative used by the dimension test.

mod fastica;
mod fobi;

pub use fastica::{fastica_extract, FastIcaOptions};
pub use fobi::{fobi_decompose, fobi_unmix};

use alloc::vec::Vec;

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct UnmixingResult {
    /// q×T unmixing matrix with orthonormal rows.
    pub w: Matrix,
    /// q×V components, `S = W·X`.
    pub s: Matrix,
    /// Per-component contrast, non-increasing.
    pub contrasts: Vec<f64>,
    pub n_restarts_used: usize,
    /// Convergence flag of every restart, in restart order.
    pub converged: Vec<bool>,
}

impl UnmixingResult {
    pub fn n_components(&self) -> usize {
        self.s.nrows()
    }

    /// Estimated mixing for whitened input: `W'` (T×q).
    pub fn mixing(&self) -> Matrix {
        self.w.transpose()
    }

    pub fn any_converged(&self) -> bool {
        self.converged.iter().any(|&c| c)
    }
}

/// Row order that sorts `values` descending, ties by index.
pub(crate) fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}
