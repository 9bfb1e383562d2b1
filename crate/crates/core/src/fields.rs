//! Spatially correlated fields on 2-D grids.
//!
//! Gaussian fields are iid standard normals convolved with a truncated
//! Gaussian kernel (zero padding at the border) and then standardized. Gamma
//! fields push a Gaussian field through `Φ` and the gamma quantile function,
//! so they keep its spatial rank structure but acquire gamma marginals.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::rng::{rng_for, standard_normals};
use crate::special::{gamma_quantile, normal_cdf, normal_sf};
use crate::stats;

/// `FWHM = 2·√(2 ln 2)·σ`
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Gaussian,
    Gamma { shape: f64, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub height: usize,
    pub width: usize,
    /// Smoothing kernel full width at half maximum, in pixels.
    pub fwhm: f64,
    pub marginal: Marginal,
}

impl FieldSpec {
    pub fn gaussian(height: usize, width: usize, fwhm: f64) -> Self {
        FieldSpec { height, width, fwhm, marginal: Marginal::Gaussian }
    }

    pub fn gamma(height: usize, width: usize, fwhm: f64, shape: f64, rate: f64) -> Self {
        FieldSpec { height, width, fwhm, marginal: Marginal::Gamma { shape, rate } }
    }

    pub fn n_pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(invalid!("zero-area grid {}x{}", self.height, self.width));
        }
        if !(self.fwhm >= 0.0 && self.fwhm.is_finite()) {
            return Err(invalid!("fwhm must be finite and non-negative, got {}", self.fwhm));
        }
        if let Marginal::Gamma { shape, rate } = self.marginal {
            if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
                return Err(invalid!("gamma marginal needs positive shape and rate, got {shape}, {rate}"));
            }
        }
        Ok(())
    }
}

/// Normalized 1-D Gaussian weights over `[-r, r]` with `r = ⌈4σ⌉`.
/// A zero FWHM gives the identity kernel `[1]`.
pub fn kernel_1d(fwhm: f64) -> Vec<f64> {
    let sigma = fwhm / FWHM_PER_SIGMA;
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = libm::ceil(4.0 * sigma) as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|d| libm::exp(-((d * d) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= total);
    k
}

/// Separable zero-padded convolution of a row-major `height × width` image.
pub fn smooth(image: &[f64], height: usize, width: usize, fwhm: f64) -> Vec<f64> {
    let k = kernel_1d(fwhm);
    if k.len() == 1 {
        return image.to_vec();
    }
    let r = (k.len() / 2) as isize;
    let (h, w) = (height as isize, width as isize);
    let mut tmp = vec![0.0; image.len()];
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for (o, kw) in (-r..=r).zip(&k) {
                let jj = j + o;
                if (0..w).contains(&jj) {
                    acc += kw * image[(i * w + jj) as usize];
                }
            }
            tmp[(i * w + j) as usize] = acc;
        }
    }
    let mut out = vec![0.0; image.len()];
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for (o, kw) in (-r..=r).zip(&k) {
                let ii = i + o;
                if (0..h).contains(&ii) {
                    acc += kw * tmp[(ii * w + j) as usize];
                }
            }
            out[(i * w + j) as usize] = acc;
        }
    }
    out
}

fn smoothed_standard_field(spec: &FieldSpec, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut rng = rng_for(seed, &[]);
    let noise = standard_normals(&mut rng, spec.n_pixels());
    let mut field = smooth(&noise, spec.height, spec.width, spec.fwhm);
    stats::standardize(&mut field)?;
    Ok(field)
}

/// Standardized Gaussian random field, flattened row-major.
pub fn gaussian_smooth_field(spec: &FieldSpec, seed: u64) -> Result<Vec<f64>> {
    if spec.marginal != Marginal::Gaussian {
        return Err(invalid!("gaussian_smooth_field needs a Gaussian marginal"));
    }
    smoothed_standard_field(spec, seed)
}

/// Gamma-marginal field before standardization: `F⁻¹_Γ(Φ(z))` for the
/// standardized Gaussian field `z` with the same seed. All values are ≥ 0.
pub fn gamma_field_raw(spec: &FieldSpec, seed: u64) -> Result<Vec<f64>> {
    let Marginal::Gamma { shape, rate } = spec.marginal else {
        return Err(invalid!("gamma_field needs a gamma marginal"));
    };
    let z = smoothed_standard_field(spec, seed)?;
    z.iter()
        .map(|&zi| {
            let (p, q) = (normal_cdf(zi), normal_sf(zi));
            gamma_quantile(p, q, shape, rate).map_err(|e| match e {
                Error::Numeric(msg) => Error::Numeric(alloc::format!("{msg} (u = {p:e})")),
                other => other,
            })
        })
        .collect()
}

/// Standardized gamma-marginal random field.
pub fn gamma_field(spec: &FieldSpec, seed: u64) -> Result<Vec<f64>> {
    let mut x = gamma_field_raw(spec, seed)?;
    stats::standardize(&mut x)?;
    Ok(x)
}

/// Dispatches on the marginal.
pub fn sample_field(spec: &FieldSpec, seed: u64) -> Result<Vec<f64>> {
    match spec.marginal {
        Marginal::Gaussian => gaussian_smooth_field(spec, seed),
        Marginal::Gamma { .. } => gamma_field(spec, seed),
    }
}

/// Mean correlation between pixels `lag` apart horizontally and vertically.
pub fn lag_correlation(field: &[f64], height: usize, width: usize, lag: usize) -> f64 {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..height {
        for j in 0..width {
            if j + lag < width {
                a.push(field[i * width + j]);
                b.push(field[i * width + j + lag]);
            }
            if i + lag < height {
                a.push(field[i * width + j]);
                b.push(field[(i + lag) * width + j]);
            }
        }
    }
    stats::correlation(&a, &b).unwrap_or(0.0)
}
