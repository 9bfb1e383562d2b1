use alloc::vec::Vec;

use super::eigen::sym_eigen;
use super::matrix::{dot, Matrix};
use crate::error::{degenerate, invalid, Result};
use crate::stats;

/// Relative eigenvalue floor used to declare a covariance rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// A T×V data matrix (rows are time points or components, columns voxels)
/// tagged with its preprocessing state.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Matrix,
    centered: bool,
    whitened: bool,
}

impl DataMatrix {
    pub fn new(values: Matrix) -> Self {
        DataMatrix { values, centered: false, whitened: false }
    }

    /// Wraps a matrix the caller asserts is already centered and whitened.
    ///
    /// The claim is checked: rows must have zero mean and `(1/V)XX' = I`
    /// within `tol` (Frobenius).
    pub fn assume_whitened(values: Matrix, tol: f64) -> Result<Self> {
        let v = values.ncols();
        if v == 0 {
            return Err(invalid!("empty data matrix"));
        }
        for (i, r) in values.rows_iter().enumerate() {
            if stats::mean(r).abs() > tol {
                return Err(invalid!("row {i} is not centered"));
            }
        }
        let dist = values.gram().scale(1.0 / v as f64).distance_from_identity();
        if dist > tol {
            return Err(invalid!("rows are not white: ‖(1/V)XX' − I‖ = {dist:e}"));
        }
        Ok(DataMatrix { values, centered: true, whitened: true })
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn into_values(self) -> Matrix {
        self.values
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn is_whitened(&self) -> bool {
        self.whitened
    }

    /// Scaled cross-product `(1/V)·X·X'`.
    pub fn covariance(&self) -> Matrix {
        self.values.gram().scale(1.0 / self.n_cols() as f64)
    }
}

/// Linear map taking centered data to its whitened version, plus the spectrum
/// it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningRecord {
    /// r×T; `Y = rotation · X`.
    pub rotation: Matrix,
    /// Full sample-covariance spectrum, descending.
    pub eigenvalues: Vec<f64>,
    /// T×r, maps whitened coordinates back to data space: `X ≈ dewhitening · Y`.
    pub dewhitening: Matrix,
}

impl WhiteningRecord {
    pub fn rank(&self) -> usize {
        self.rotation.nrows()
    }
}

/// Subtracts each row's mean.
pub fn center_rows(x: &DataMatrix) -> Result<DataMatrix> {
    let (t, v) = x.values.shape();
    if t == 0 || v == 0 {
        return Err(invalid!("cannot center an empty {t}x{v} matrix"));
    }
    if v < 2 {
        return Err(invalid!("centering needs at least 2 columns, got {v}"));
    }
    let mut values = x.values.clone();
    for i in 0..t {
        let row = values.row_mut(i);
        let m = stats::mean(row);
        row.iter_mut().for_each(|e| *e -= m);
    }
    Ok(DataMatrix { values, centered: true, whitened: false })
}

fn require_centered(x: &DataMatrix) -> Result<()> {
    if x.centered {
        return Ok(());
    }
    let v = x.n_cols() as f64;
    for (i, r) in x.values.rows_iter().enumerate() {
        let scale = r.iter().fold(1.0f64, |m, e| m.max(e.abs()));
        if (stats::mean(r) * v).abs() > 1e-8 * v * scale {
            return Err(invalid!("whitening expects centered rows; row {i} has nonzero mean"));
        }
    }
    Ok(())
}

/// Whitens centered data to `(1/V)·Y·Y' = I_T` via the eigendecomposition of
/// the sample covariance, `rotation = Λ^{-1/2}U'`.
pub fn whiten(x: &DataMatrix) -> Result<(DataMatrix, WhiteningRecord)> {
    require_centered(x)?;
    let t = x.n_rows();
    if t == 0 || x.n_cols() == 0 {
        return Err(invalid!("cannot whiten an empty matrix"));
    }
    let eig = sym_eigen(&x.covariance())?;
    let floor = RANK_TOL * eig.values[0].max(0.0);
    let deficient = eig.values.iter().filter(|&&l| !(l > floor)).count();
    if deficient > 0 {
        return Err(degenerate!(
            "sample covariance is rank deficient: {deficient} of {t} eigenvalues at or below {floor:e}"
        ));
    }
    whiten_with(x, eig.values, &eig.vectors, t)
}

/// Whitens onto the leading `rank` eigen-directions of the sample covariance,
/// producing a `rank × V` matrix. Used where the data live in a known
/// lower-dimensional subspace.
pub fn whiten_reduced(x: &DataMatrix, rank: usize) -> Result<(DataMatrix, WhiteningRecord)> {
    require_centered(x)?;
    if rank == 0 || rank > x.n_rows() {
        return Err(invalid!("reduced whitening rank {rank} outside 1..={}", x.n_rows()));
    }
    let eig = sym_eigen(&x.covariance())?;
    let floor = RANK_TOL * eig.values[0].max(0.0);
    if !(eig.values[rank - 1] > floor) {
        return Err(degenerate!(
            "only {} eigenvalues exceed the rank tolerance, {rank} requested",
            eig.values.iter().filter(|&&l| l > floor).count()
        ));
    }
    whiten_with(x, eig.values, &eig.vectors, rank)
}

fn whiten_with(
    x: &DataMatrix,
    values: Vec<f64>,
    vectors: &Matrix,
    rank: usize,
) -> Result<(DataMatrix, WhiteningRecord)> {
    let t = x.n_rows();
    let rotation = Matrix::from_fn(rank, t, |i, j| vectors[(j, i)] / libm::sqrt(values[i]));
    let dewhitening = Matrix::from_fn(t, rank, |i, j| vectors[(i, j)] * libm::sqrt(values[j]));
    let y = rotation.matmul(&x.values)?;
    Ok((
        DataMatrix { values: y, centered: true, whitened: true },
        WhiteningRecord { rotation, eigenvalues: values, dewhitening },
    ))
}

/// Centers then whitens.
pub fn prepare(x: &Matrix) -> Result<(DataMatrix, WhiteningRecord)> {
    whiten(&center_rows(&DataMatrix::new(x.clone()))?)
}

/// `A·(I − (1/V)·S'·S)`: removes from each row of `a` its component in the
/// row space of `s`, whose rows must be orthonormal under `(1/V)⟨·,·⟩`.
pub fn residual_project(s: &Matrix, a: &Matrix) -> Result<Matrix> {
    let v = s.ncols();
    if a.ncols() != v {
        return Err(invalid!("residual projection: S has {v} columns but A has {}", a.ncols()));
    }
    let inv_v = 1.0 / v as f64;
    let mut out = a.clone();
    for i in 0..a.nrows() {
        let coefs: Vec<f64> = s.rows_iter().map(|sr| dot(a.row(i), sr) * inv_v).collect();
        let row = out.row_mut(i);
        for (c, sr) in coefs.iter().zip(s.rows_iter()) {
            for (o, e) in row.iter_mut().zip(sr) {
                *o -= c * e;
            }
        }
    }
    Ok(out)
}
