//! Shared null distributions for the dimension test.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nglab_core::dimtest::{null_max_statistics, DimTestConfig, NullDistribution, NullSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    n_rows: usize,
    v: usize,
    k: usize,
    b: usize,
    seed: u64,
    null: (u8, usize, usize, u64),
}

impl Key {
    fn new(n_rows: usize, v: usize, k: usize, c: &DimTestConfig) -> Self {
        let null = match c.null {
            NullSpec::Iid => (0, 0, 0, 0),
            NullSpec::Grf { height, width, fwhm } => (1, height, width, fwhm.to_bits()),
        };
        Key { n_rows, v, k, b: c.b, seed: c.seed, null }
    }
}

/// Memoizes null maxima by everything they depend on. Two threads asking for
/// the same missing entry may both compute it; the results are identical.
#[derive(Debug, Default)]
pub struct NullCache {
    map: Mutex<HashMap<Key, Arc<[f64]>>>,
}

impl NullCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl NullDistribution for NullCache {
    fn max_statistics(&self, n_rows: usize, v: usize, k: usize, config: &DimTestConfig) -> nglab_core::Result<Arc<[f64]>> {
        let key = Key::new(n_rows, v, k, config);
        if let Some(hit) = self.map.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let fresh: Arc<[f64]> = null_max_statistics(n_rows, v, k, config)?.into();
        Ok(self.map.lock().unwrap().entry(key).or_insert(fresh).clone())
    }
}
