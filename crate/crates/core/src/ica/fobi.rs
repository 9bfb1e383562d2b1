use alloc::vec;
use alloc::vec::Vec;

use super::{descending_order, UnmixingResult};
use crate::contrast::excess_kurtosis;
use crate::error::{invalid, Result};
use crate::linalg::{sym_eigen, DataMatrix};

/// Closed-form FOBI unmixing of whitened data, rows ordered by `|excess kurtosis|`.
pub fn fobi_unmix(x: &DataMatrix) -> Result<UnmixingResult> {
    fobi_decompose(x).map(|(r, _)| r)
}

/// FOBI unmixing together with the eigenvalues of the kurtosis-weighted
/// covariance `B = (1/V)·Σ_v ‖x_v‖²·x_v·x_v'`, aligned with the returned rows.
pub fn fobi_decompose(x: &DataMatrix) -> Result<(UnmixingResult, Vec<f64>)> {
    if !x.is_whitened() {
        return Err(invalid!("FOBI expects whitened data"));
    }
    let xv = x.values();
    let (t, v) = xv.shape();
    if t == 0 || v < 4 {
        return Err(invalid!("FOBI needs at least one row and four columns, got {t}x{v}"));
    }
    let mut norms = vec![0.0; v];
    for r in xv.rows_iter() {
        for (n, e) in norms.iter_mut().zip(r) {
            *n += e * e;
        }
    }
    let mut weighted = xv.clone();
    for i in 0..t {
        for (e, n) in weighted.row_mut(i).iter_mut().zip(&norms) {
            *e *= n;
        }
    }
    let b = weighted.mul_transpose(xv)?.scale(1.0 / v as f64);
    let eig = sym_eigen(&b)?;
    let w = eig.vectors.transpose();
    let s = w.matmul(xv)?;
    let d = s
        .rows_iter()
        .map(|r| excess_kurtosis(r).map(f64::abs))
        .collect::<Result<Vec<f64>>>()?;
    let order = descending_order(&d);
    let result = UnmixingResult {
        w: w.select_rows(&order),
        s: s.select_rows(&order),
        contrasts: order.iter().map(|&i| d[i]).collect(),
        n_restarts_used: 1,
        converged: vec![true],
    };
    let eigenvalues = order.iter().map(|&i| eig.values[i]).collect();
    Ok((result, eigenvalues))
}

