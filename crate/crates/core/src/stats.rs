//! Small descriptive-statistics helpers over `f64` slices.
//!
//! Variances use the `1/n` convention throughout so a standardized row `s`
//! satisfies `(1/n)·s·s' = 1` exactly.

use alloc::vec::Vec;

use crate::error::{degenerate, Result};

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    // Neumaier summation; rows can be long and badly scaled
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in x {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    (sum + comp) / x.len() as f64
}

/// Population variance (divides by `n`).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len().max(1) as f64
}

pub fn std_dev(x: &[f64]) -> f64 {
    libm::sqrt(variance(x))
}

/// Shift and scale `x` in place to mean 0 and population sd 1.
pub fn standardize(x: &mut [f64]) -> Result<()> {
    let m = mean(x);
    x.iter_mut().for_each(|v| *v -= m);
    let sd = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64);
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(degenerate!("cannot standardize a row with zero or non-finite variance"));
    }
    x.iter_mut().for_each(|v| *v /= sd);
    // one refinement pass pins mean and sd to rounding level
    let m = mean(x);
    x.iter_mut().for_each(|v| *v -= m);
    let sd = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64);
    x.iter_mut().for_each(|v| *v /= sd);
    Ok(())
}

/// Pearson correlation; centering is applied even for pre-centered rows.
pub fn correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    let ma = mean(a);
    let mb = mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if !(saa > 0.0 && sbb > 0.0) {
        return Err(degenerate!("correlation of a zero-variance row"));
    }
    Ok(sab / libm::sqrt(saa * sbb))
}

/// Sample skewness `m3 / m2^{3/2}`; zero for constant input.
pub fn skewness(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len().max(1) as f64;
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in x {
        let d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if m2 > 0.0 {
        m3 / (m2 * libm::sqrt(m2))
    } else {
        0.0
    }
}

/// Linearly interpolated quantile (type 7) of unsorted data.
pub fn quantile(x: &[f64], p: f64) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut s: Vec<f64> = x.to_vec();
    s.sort_by(f64::total_cmp);
    let h = (s.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

/// Lag-`lag` autocorrelation of a sequence (biased estimator).
pub fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    let m = mean(x);
    let denom: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if denom == 0.0 || lag >= x.len() {
        return 0.0;
    }
    let num: f64 = x.windows(lag + 1).map(|w| (w[0] - m) * (w[lag] - m)).sum();
    num / denom
}
