use nglab_core::dimtest::{
    estimate_ng_dimension, null_max_statistics, test_dimension_k, DimTestConfig, DimTestReport, NullSpec,
};
use nglab_core::linalg::{prepare, DataMatrix, Matrix};
use nglab_core::rng::{rng_for, standard_normals, unit_laplace};
use proptest::prelude::*;

fn gaussian_data(t: usize, v: usize, seed: u64) -> DataMatrix {
    let mut rng = rng_for(seed, &[]);
    prepare(&Matrix::from_vec(t, v, standard_normals(&mut rng, t * v)).unwrap()).unwrap().0
}

/// `n_ng` Laplace rows and `t − n_ng` Gaussian rows, randomly mixed.
fn planted(t: usize, n_ng: usize, v: usize, seed: u64) -> DataMatrix {
    let mut rows = Vec::new();
    for j in 0..t {
        let mut rng = rng_for(seed, &[j as u64]);
        rows.push(if j < n_ng { unit_laplace(&mut rng, v) } else { standard_normals(&mut rng, v) });
    }
    let s = Matrix::from_rows(&rows).unwrap();
    let mut rng = rng_for(seed, &[999]);
    let a = Matrix::from_vec(t, t, standard_normals(&mut rng, t * t)).unwrap();
    prepare(&a.matmul(&s).unwrap()).unwrap().0
}

fn config(seed: u64) -> DimTestConfig {
    DimTestConfig { b: 200, alpha: 0.05, seed, null: NullSpec::Iid }
}

fn check_path(r: &DimTestReport, t: usize) {
    let alpha = r.config.alpha;
    for s in &r.path {
        assert!((0.0..=1.0).contains(&s.p_value));
        let scaled = s.p_value * r.config.b as f64;
        assert!((scaled - scaled.round()).abs() < 1e-9);
    }
    // every rejected k lies below every non-rejected k
    let max_rej = r.path.iter().filter(|s| s.p_value <= alpha).map(|s| s.k as i64).max().unwrap_or(-1);
    let min_acc = r.path.iter().filter(|s| s.p_value > alpha).map(|s| s.k as i64).min().unwrap_or(t as i64);
    assert!(max_rej < min_acc);
    assert_eq!(r.k_hat as i64, min_acc);
    assert_eq!(max_rej + 1, min_acc);
    if let Some(p) = r.p_value_at(r.k_hat) {
        assert!(p > alpha);
    }
    if r.k_hat > 0 {
        assert!(r.p_value_at(r.k_hat - 1).unwrap() <= alpha);
    }
}

#[test]
fn size_under_iid_null() {
    let reps = 200;
    let mut rejected = 0;
    for r in 0..reps {
        let x = gaussian_data(5, 2000, 10_000 + r);
        let (p, _) = test_dimension_k(&x, 0, &config(r)).unwrap();
        rejected += (p <= 0.05) as usize;
    }
    let rate = rejected as f64 / reps as f64;
    assert!((0.01..=0.12).contains(&rate), "rejection rate {rate}");
}

#[test]
fn power_against_one_laplace_source() {
    let reps = 40;
    let mut rejected = 0;
    for r in 0..reps {
        let x = planted(5, 1, 5000, 500 + r);
        let (p, _) = test_dimension_k(&x, 0, &config(r)).unwrap();
        rejected += (p <= 0.05) as usize;
    }
    assert!(rejected as f64 >= 0.95 * reps as f64, "{rejected}/{reps}");
}

#[test]
fn pure_noise_gives_zero_dimension() {
    let reps = 40;
    let mut zeros = 0;
    for r in 0..reps {
        let x = gaussian_data(10, 2000, 20_000 + r);
        let rep = estimate_ng_dimension(&x, &config(r)).unwrap();
        check_path(&rep, 10);
        zeros += (rep.k_hat == 0) as usize;
    }
    assert!(zeros as f64 >= 0.9 * reps as f64, "{zeros}/{reps}");
}

#[test]
fn planted_dimension_is_found() {
    let x = planted(8, 3, 4000, 77);
    let rep = estimate_ng_dimension(&x, &config(1)).unwrap();
    check_path(&rep, 8);
    assert_eq!(rep.k_hat, 3, "{:?}", rep.path);
}

#[test]
fn last_hypothesis_runs() {
    let x = gaussian_data(6, 1000, 3);
    let (p, stat) = test_dimension_k(&x, 5, &config(2)).unwrap();
    assert!((0.0..=1.0).contains(&p) && stat >= 0.0);
    assert!(test_dimension_k(&x, 6, &config(2)).is_err());
}

#[test]
fn zero_resamples_rejected() {
    let x = gaussian_data(3, 500, 1);
    let cfg = DimTestConfig { b: 0, ..config(0) };
    assert!(test_dimension_k(&x, 0, &cfg).is_err());
}

#[test]
fn grf_null_requires_matching_grid() {
    let x = gaussian_data(3, 100, 1);
    let cfg = DimTestConfig { null: NullSpec::Grf { height: 9, width: 9, fwhm: 2.0 }, ..config(0) };
    assert!(test_dimension_k(&x, 0, &cfg).is_err());
}

#[test]
fn unwhitened_data_rejected() {
    let mut rng = rng_for(1, &[]);
    let x = DataMatrix::new(Matrix::from_vec(2, 100, standard_normals(&mut rng, 200)).unwrap());
    assert!(test_dimension_k(&x, 0, &config(0)).is_err());
}

#[test]
fn null_draws_are_deterministic() {
    let cfg = DimTestConfig { b: 20, ..config(5) };
    assert_eq!(null_max_statistics(4, 300, 1, &cfg).unwrap(), null_max_statistics(4, 300, 1, &cfg).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn search_path_is_consistent(t in 2usize..7, n_ng in 0usize..4, seed in any::<u64>()) {
        let n_ng = n_ng.min(t);
        let x = planted(t, n_ng, 800, seed);
        let cfg = DimTestConfig { b: 40, alpha: 0.05, seed, null: NullSpec::Iid };
        let rep = estimate_ng_dimension(&x, &cfg).unwrap();
        check_path(&rep, t);
        prop_assert!(rep.k_hat <= t);
    }
}
