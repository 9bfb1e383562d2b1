use alloc::vec::Vec;

use nalgebra::SymmetricEigen;

use super::matrix::Matrix;
use crate::error::{degenerate, invalid, Result};

/// Eigendecomposition of a symmetric matrix with eigenvalues in descending order.
///
/// `vectors` holds the eigenvectors as columns, aligned with `values`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

pub fn sym_eigen(a: &Matrix) -> Result<SymEigen> {
    let (n, m) = a.shape();
    if n != m {
        return Err(invalid!("eigendecomposition needs a square matrix, got {n}x{m}"));
    }
    if a.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(degenerate!("matrix contains non-finite entries"));
    }
    if n == 0 {
        return Ok(SymEigen { values: Vec::new(), vectors: Matrix::zeros(0, 0) });
    }
    let eig = SymmetricEigen::new(a.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps ties in the solver's index order
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

/// `(A)^{-1/2}` for a symmetric positive definite `A`.
pub fn inv_sqrt_spd(a: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(a)?;
    let n = eig.values.len();
    let top = eig.values.first().copied().unwrap_or(0.0);
    if let Some(&low) = eig.values.last() {
        if !(low > 1e-14 * top.max(f64::MIN_POSITIVE)) {
            return Err(degenerate!("matrix is not positive definite (smallest eigenvalue {low:e})"));
        }
    }
    let scales: Vec<f64> = eig.values.iter().map(|&l| 1.0 / libm::sqrt(l)).collect();
    Ok(Matrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| eig.vectors[(i, k)] * scales[k] * eig.vectors[(j, k)]).sum()
    }))
}

/// Symmetric orthogonalization `W ← (WW')^{-1/2} W`, making the rows orthonormal.
///
/// Computed as the polar factor `UV'` of `W = USV'`, which stays accurate
/// when `W` is badly conditioned.
pub fn sym_orthonormalize(w: &Matrix) -> Result<Matrix> {
    let (q, t) = w.shape();
    if q > t {
        return Err(invalid!("cannot orthonormalize {q} rows of length {t}"));
    }
    if w.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(degenerate!("matrix contains non-finite entries"));
    }
    let svd = nalgebra::SVD::try_new(w.to_nalgebra(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| degenerate!("singular value decomposition did not converge"))?;
    if !(svd.singular_values.max() > 0.0) {
        return Err(degenerate!("cannot orthonormalize a zero matrix"));
    }
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    Ok(Matrix::from_nalgebra(&(u * v_t)))
}

/// Orthogonal factor `Q` (n×k, orthonormal columns) of a thin QR factorization.
pub fn qr_q(a: &Matrix) -> Result<Matrix> {
    let (n, k) = a.shape();
    if k > n {
        return Err(invalid!("thin QR needs rows >= columns, got {n}x{k}"));
    }
    let qr = a.to_nalgebra().qr();
    let q = qr.q();
    let r = qr.r();
    // fix signs so diag(R) >= 0, making Q unique
    let mut out = Matrix::from_nalgebra(&q);
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                out[(i, j)] = -out[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Singular values of a small dense matrix, descending.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Principal angles (radians, ascending) between the row spaces of `a` and `b`.
///
/// Both inputs must have full row rank and share the column count.
pub fn principal_angles(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    if a.ncols() != b.ncols() {
        return Err(invalid!("principal angles need equal ambient dimension"));
    }
    let qa = sym_orthonormalize(a)?;
    let qb = sym_orthonormalize(b)?;
    let cross = qa.mul_transpose(&qb)?;
    Ok(singular_values(&cross)
        .into_iter()
        .map(|c| libm::acos(c.clamp(-1.0, 1.0)))
        .collect())
}
