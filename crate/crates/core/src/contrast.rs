//! Non-Gaussianity measures: the logistic log-density contrast used by the
//! fixed-point engine and excess kurtosis used by FOBI ordering.

use crate::error::{degenerate, invalid, Result};
use crate::stats;

/// Logistic log-density `G(x) = log f_s(x)` with the scale chosen so the
/// reference density has unit variance (`s = √3/π`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticContrast {
    scale: f64,
}

impl Default for LogisticContrast {
    fn default() -> Self {
        LogisticContrast { scale: libm::sqrt(3.0) / core::f64::consts::PI }
    }
}

impl LogisticContrast {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `G(x) = −|x|/s − ln s − 2·ln(1 + e^{−|x|/s})`, the symmetric, overflow-free form.
    #[inline]
    pub fn g_value(&self, x: f64) -> f64 {
        let a = x.abs() / self.scale;
        -a - libm::log(self.scale) - 2.0 * libm::log1p(libm::exp(-a))
    }

    /// Returns `(G'(x), G''(x)) = (−tanh(x/2s)/s, −sech²(x/2s)/(2s²))`.
    #[inline]
    pub fn derivatives(&self, x: f64) -> (f64, f64) {
        let s = self.scale;
        let t = libm::tanh(x / (2.0 * s));
        (-t / s, -(1.0 - t * t) / (2.0 * s * s))
    }

    /// Reference density `f_s(x)`.
    pub fn density(&self, x: f64) -> f64 {
        libm::exp(self.g_value(x))
    }

    /// Mean of `G` over a row without any variance precheck.
    pub fn mean_value(&self, row: &[f64]) -> f64 {
        row.iter().map(|&x| self.g_value(x)).sum::<f64>() / row.len() as f64
    }
}

/// Average logistic log-density of a standardized row.
pub fn logistic_contrast(row: &[f64]) -> Result<f64> {
    if row.len() < 2 {
        return Err(invalid!("contrast needs at least 2 values, got {}", row.len()));
    }
    let var = stats::variance(row);
    if !(var > 0.0) {
        return Err(degenerate!("logistic contrast of a zero-variance row"));
    }
    if (var - 1.0).abs() > 1e-3 {
        return Err(invalid!("logistic contrast expects unit variance, got {var}"));
    }
    Ok(LogisticContrast::default().mean_value(row))
}

/// `m4 / m2² − 3` from central sample moments.
pub fn excess_kurtosis(row: &[f64]) -> Result<f64> {
    if row.len() < 4 {
        return Err(invalid!("kurtosis needs at least 4 values, got {}", row.len()));
    }
    let m = stats::mean(row);
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in row {
        let d2 = (x - m) * (x - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    let n = row.len() as f64;
    m2 /= n;
    m4 /= n;
    if !(m2 > 0.0) {
        return Err(degenerate!("kurtosis of a zero-variance row"));
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn zeros_give_peak_value() {
        let c = LogisticContrast::default();
        let expected = libm::log(1.0 / (4.0 * c.scale()));
        assert!((c.mean_value(&[0.0; 8]) - expected).abs() < 1e-15);
    }

    #[test]
    fn peak_bounds_every_value() {
        let c = LogisticContrast::default();
        let top = c.g_value(0.0);
        for i in -400..400 {
            assert!(c.g_value(i as f64 * 0.05) <= top);
        }
        // no overflow far in the tails
        assert!(c.g_value(1e6).is_finite());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let c = LogisticContrast::default();
        let h = 1e-6;
        for &x in &[-3.0, -0.4, 0.0, 0.7, 2.5] {
            let (g1, g2) = c.derivatives(x);
            let fd1 = (c.g_value(x + h) - c.g_value(x - h)) / (2.0 * h);
            let fd2 = (c.derivatives(x + h).0 - c.derivatives(x - h).0) / (2.0 * h);
            assert!((g1 - fd1).abs() < 1e-7, "x={x}");
            assert!((g2 - fd2).abs() < 1e-7, "x={x}");
        }
    }

    #[test]
    fn rademacher_kurtosis() {
        let row: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(excess_kurtosis(&row).unwrap(), -2.0);
    }

    #[test]
    fn constant_row_is_degenerate() {
        assert!(matches!(excess_kurtosis(&[3.0; 10]), Err(crate::Error::DegenerateData(_))));
        assert!(matches!(logistic_contrast(&[3.0; 10]), Err(crate::Error::DegenerateData(_))));
    }

    #[test]
    fn short_rows_rejected() {
        assert!(excess_kurtosis(&[1.0, 2.0, 3.0]).is_err());
        assert!(logistic_contrast(&[1.0]).is_err());
        assert!(logistic_contrast(&vec![1.0, -1.0, 3.0, -3.0]).is_err());
    }
}
