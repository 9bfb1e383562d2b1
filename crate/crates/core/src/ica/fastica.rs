use alloc::vec::Vec;

use super::{descending_order, UnmixingResult};
use crate::contrast::LogisticContrast;
use crate::error::{invalid, Result};
use crate::linalg::{qr_q, sym_orthonormalize, DataMatrix, Matrix};
use crate::par::par_map;
use crate::rng::{rng_for, standard_normals};

#[derive(Debug, Clone, PartialEq)]
pub struct FastIcaOptions {
    pub contrast: LogisticContrast,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FastIcaOptions {
    fn default() -> Self {
        FastIcaOptions {
            contrast: LogisticContrast::default(),
            restarts: 30,
            seed: 0,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

impl FastIcaOptions {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

struct RestartOutcome {
    w: Matrix,
    s: Matrix,
    contrasts: Vec<f64>,
    total: f64,
    converged: bool,
}

/// Extracts `q ≤ T` components of whitened `x` maximizing the summed logistic
/// contrast, keeping the best of `opts.restarts` random starts.
///
/// Restart `r` is seeded with `opts.seed + r`. Non-convergence is reported via
/// [`UnmixingResult::converged`], never as an error.
pub fn fastica_extract(x: &DataMatrix, q: usize, opts: &FastIcaOptions) -> Result<UnmixingResult> {
    let t = x.n_rows();
    if !x.is_whitened() {
        return Err(invalid!("fixed-point extraction expects whitened data"));
    }
    if q == 0 || q > t {
        return Err(invalid!("requested {q} components from {t}-dimensional data"));
    }
    if opts.restarts == 0 {
        return Err(invalid!("at least one restart is required"));
    }
    let outcomes: Vec<Result<RestartOutcome>> =
        par_map(opts.restarts, |r| run_restart(x, q, opts, opts.seed.wrapping_add(r as u64)));
    let mut converged = Vec::with_capacity(outcomes.len());
    let mut best: Option<RestartOutcome> = None;
    for outcome in outcomes {
        let outcome = outcome?;
        converged.push(outcome.converged);
        // strict comparison keeps the lowest restart index on ties
        if best.as_ref().is_none_or(|b| outcome.total > b.total) {
            best = Some(outcome);
        }
    }
    let best = best.expect("restarts >= 1");
    let order = descending_order(&best.contrasts);
    Ok(UnmixingResult {
        w: best.w.select_rows(&order),
        s: best.s.select_rows(&order),
        contrasts: order.iter().map(|&i| best.contrasts[i]).collect(),
        n_restarts_used: opts.restarts,
        converged,
    })
}

fn run_restart(x: &DataMatrix, q: usize, opts: &FastIcaOptions, seed: u64) -> Result<RestartOutcome> {
    let xv = x.values();
    let (t, v) = xv.shape();
    let mut rng = rng_for(seed, &[]);
    let z = Matrix::from_vec(t, q, standard_normals(&mut rng, t * q))?;
    let mut w = qr_q(&z)?.transpose();
    let contrast = opts.contrast;
    let inv_v = 1.0 / v as f64;

    let mut converged = false;
    for _ in 0..opts.max_iter {
        let mut y = w.matmul(xv)?;
        let mut mean_dg = Vec::with_capacity(q);
        for j in 0..q {
            let mut acc = 0.0;
            for e in y.row_mut(j).iter_mut() {
                let (g1, g2) = contrast.derivatives(*e);
                *e = g1;
                acc += g2;
            }
            mean_dg.push(acc * inv_v);
        }
        // w_j ← E[x g(w_j'x)] − E[g'(w_j'x)] w_j
        let mut w_new = y.mul_transpose(xv)?.scale(inv_v);
        for j in 0..q {
            for k in 0..t {
                w_new[(j, k)] -= mean_dg[j] * w[(j, k)];
            }
        }
        let w_new = sym_orthonormalize(&w_new)?;
        let change = (0..q)
            .map(|j| {
                let d: f64 = (0..t).map(|k| w_new[(j, k)] * w[(j, k)]).sum();
                1.0 - d.abs()
            })
            .fold(0.0, f64::max);
        w = w_new;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    let s = w.matmul(xv)?;
    let contrasts: Vec<f64> = s.rows_iter().map(|r| contrast.mean_value(r)).collect();
    let total = contrasts.iter().sum();
    Ok(RestartOutcome { w, s, contrasts, total, converged })
}
