use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::rng::rng_for;

/// AR(1) time-course generator for mixing columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingSpec {
    pub ar_coefficient: f64,
    pub t: usize,
}

impl MixingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.ar_coefficient.abs() < 1.0) {
            return Err(invalid!("AR coefficient must satisfy |phi| < 1, got {}", self.ar_coefficient));
        }
        if self.t == 0 {
            return Err(invalid!("mixing columns need at least one time point"));
        }
        Ok(())
    }
}

/// Stationary AR(1) path rescaled so its sum of squares equals `target_variance`.
pub fn simulate_mixing_ar1(spec: &MixingSpec, target_variance: f64, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    if !(target_variance > 0.0 && target_variance.is_finite()) {
        return Err(invalid!("target variance must be positive, got {target_variance}"));
    }
    let phi = spec.ar_coefficient;
    let mut rng = rng_for(seed, &[]);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut path = Vec::with_capacity(spec.t);
    let mut prev = z() / libm::sqrt(1.0 - phi * phi);
    path.push(prev);
    for _ in 1..spec.t {
        prev = phi * prev + z();
        path.push(prev);
    }
    let ss: f64 = path.iter().map(|x| x * x).sum();
    let c = libm::sqrt(target_variance / ss);
    path.iter_mut().for_each(|x| *x *= c);
    Ok(path)
}
