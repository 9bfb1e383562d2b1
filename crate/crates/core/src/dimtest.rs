//! Resampling test for the number of non-Gaussian components.
//!
//! `H0^k`: at most `k` of the `T` whitened rows are non-Gaussian. FOBI sorts
//! the data's components by `|excess kurtosis|`; the `(k+1)`-th value is
//! compared with the largest value FOBI finds among `T − k` freshly sampled
//! Gaussian rows, repeated `B` times. The null rows can be iid or spatially
//! smoothed to match correlated noise.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::fields::{gaussian_smooth_field, FieldSpec};
use crate::ica::fobi_unmix;
use crate::linalg::{prepare, DataMatrix, Matrix};
use crate::par::par_map;
use crate::rng::{derive_seed, rng_for, standard_normals};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NullSpec {
    /// Independent standard normal pixels.
    Iid,
    /// Smoothed Gaussian random fields on a `height × width` grid.
    Grf { height: usize, width: usize, fwhm: f64 },
}

impl NullSpec {
    pub fn validate(&self, v: usize) -> Result<()> {
        match *self {
            NullSpec::Iid => Ok(()),
            NullSpec::Grf { height, width, fwhm } => {
                if height * width != v {
                    return Err(invalid!(
                        "null grid {height}x{width} has {} pixels but the data have {v} columns",
                        height * width
                    ));
                }
                FieldSpec::gaussian(height, width, fwhm).validate()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimTestConfig {
    /// Number of null resamples `B`.
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    pub null: NullSpec,
}

impl Default for DimTestConfig {
    fn default() -> Self {
        DimTestConfig { b: 200, alpha: 0.05, seed: 0, null: NullSpec::Iid }
    }
}

impl DimTestConfig {
    pub fn validate(&self, v: usize) -> Result<()> {
        if self.b == 0 {
            return Err(invalid!("the number of resamples B must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        self.null.validate(v)
    }
}

/// One visited hypothesis in a sequential search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestStep {
    pub k: usize,
    pub p_value: f64,
    /// Observed `D` of the `(k+1)`-th most non-Gaussian data component.
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimTestReport {
    /// Tests in the order they were run.
    pub path: Vec<TestStep>,
    pub k_hat: usize,
    pub config: DimTestConfig,
}

impl DimTestReport {
    pub fn p_value_at(&self, k: usize) -> Option<f64> {
        self.path.iter().find(|s| s.k == k).map(|s| s.p_value)
    }
}

/// `n_rows` standardized Gaussian noise rows of length `v`. Row `l` is drawn
/// from the stream keyed by `(seed, l)`.
pub fn sample_gaussian_noise(n_rows: usize, v: usize, spec: &NullSpec, seed: u64) -> Result<Matrix> {
    spec.validate(v)?;
    if v < 2 {
        return Err(invalid!("noise rows need at least 2 columns"));
    }
    let mut out = Matrix::zeros(n_rows, v);
    for l in 0..n_rows {
        let row = match *spec {
            NullSpec::Iid => {
                let mut rng = rng_for(seed, &[l as u64]);
                let mut r = standard_normals(&mut rng, v);
                stats::standardize(&mut r)?;
                r
            }
            NullSpec::Grf { height, width, fwhm } => gaussian_smooth_field(
                &FieldSpec::gaussian(height, width, fwhm),
                derive_seed(seed, &[l as u64]),
            )?,
        };
        out.row_mut(l).copy_from_slice(&row);
    }
    Ok(out)
}

/// Source of null statistics `D(Ŝ^{(b)}_{G,(1)})`, b = 1..B, for a given `k`.
///
/// The null draws depend only on `(T − k, V, config, k)`, never on the data, so
/// implementations may cache them across subjects.
pub trait NullDistribution {
    fn max_statistics(&self, n_rows: usize, v: usize, k: usize, config: &DimTestConfig) -> Result<Arc<[f64]>>;
}

/// Computes every null sample on demand.
#[derive(Debug, Default, Clone, Copy)]
pub struct FreshNulls;

impl NullDistribution for FreshNulls {
    fn max_statistics(&self, n_rows: usize, v: usize, k: usize, config: &DimTestConfig) -> Result<Arc<[f64]>> {
        null_max_statistics(n_rows, v, k, config).map(Arc::from)
    }
}

/// The `B` null maxima for hypothesis `k`; resample `b` uses seed `(seed, k, b)`.
pub fn null_max_statistics(n_rows: usize, v: usize, k: usize, config: &DimTestConfig) -> Result<Vec<f64>> {
    config.validate(v)?;
    if n_rows == 0 {
        return Err(invalid!("null sample needs at least one row"));
    }
    par_map(config.b, |b| {
        let seed = derive_seed(config.seed, &[k as u64, b as u64]);
        let g = sample_gaussian_noise(n_rows, v, &config.null, seed)?;
        let (white, _) = prepare(&g)?;
        Ok(fobi_unmix(&white)?.contrasts[0])
    })
    .into_iter()
    .collect()
}

/// `#{stat < null_b} / B`; ties count as non-rejection evidence.
pub fn empirical_p_value(stat: f64, nulls: &[f64]) -> f64 {
    nulls.iter().filter(|&&d| stat < d).count() as f64 / nulls.len() as f64
}

fn check_input(x: &DataMatrix, config: &DimTestConfig) -> Result<()> {
    if !x.is_whitened() {
        return Err(invalid!("the dimension test expects whitened data"));
    }
    config.validate(x.n_cols())
}

/// Tests `H0^k` on whitened `x`, returning `(p, statistic)`.
pub fn test_dimension_k(x: &DataMatrix, k: usize, config: &DimTestConfig) -> Result<(f64, f64)> {
    test_dimension_k_with(x, k, config, &FreshNulls)
}

pub fn test_dimension_k_with(
    x: &DataMatrix,
    k: usize,
    config: &DimTestConfig,
    nulls: &dyn NullDistribution,
) -> Result<(f64, f64)> {
    check_input(x, config)?;
    let t = x.n_rows();
    if k >= t {
        return Err(invalid!("k = {k} must be below the row count {t}"));
    }
    let stat = fobi_unmix(x)?.contrasts[k];
    let null = nulls.max_statistics(t - k, x.n_cols(), k, config)?;
    Ok((empirical_p_value(stat, &null), stat))
}

/// Binary search for the non-Gaussian dimension.
///
/// Keeps `lo` (rejected, or the virtual −1) and `hi` (not rejected, or the
/// virtual `T`), tests `⌊(lo + hi)/2⌋`, and stops when they are adjacent;
/// `k̂ = hi` is then the smallest visited `k` whose null was not rejected,
/// with `k̂ − 1` rejected.
pub fn estimate_ng_dimension(x: &DataMatrix, config: &DimTestConfig) -> Result<DimTestReport> {
    estimate_ng_dimension_with(x, config, &FreshNulls)
}

pub fn estimate_ng_dimension_with(
    x: &DataMatrix,
    config: &DimTestConfig,
    nulls: &dyn NullDistribution,
) -> Result<DimTestReport> {
    check_input(x, config)?;
    let t = x.n_rows();
    if t < 2 {
        return Err(invalid!("dimension search needs at least 2 rows, got {t}"));
    }
    // one FOBI serves every k
    let sorted_d = fobi_unmix(x)?.contrasts;
    let (mut lo, mut hi) = (-1i64, t as i64);
    let mut path = Vec::new();
    while hi - lo > 1 {
        let k = (lo + hi).div_euclid(2) as usize;
        let stat = sorted_d[k];
        let null = nulls.max_statistics(t - k, x.n_cols(), k, config)?;
        let p = empirical_p_value(stat, &null);
        path.push(TestStep { k, p_value: p, statistic: stat });
        if p > config.alpha {
            hi = k as i64;
        } else {
            lo = k as i64;
        }
    }
    Ok(DimTestReport { path, k_hat: hi as usize, config: *config })
}
