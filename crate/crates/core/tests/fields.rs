use nglab_core::contrast::logistic_contrast;
use nglab_core::dimtest::{sample_gaussian_noise, NullSpec};
use nglab_core::fields::{
    gamma_field, gamma_field_raw, gaussian_smooth_field, lag_correlation, FieldSpec, FWHM_PER_SIGMA,
};
use nglab_core::rng::{rng_for, standard_normals};
use nglab_core::stats;

/// Direct 2-D convolution with an unnormalized-then-normalized square kernel.
fn direct_field(h: usize, w: usize, fwhm: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, &[]);
    let noise = standard_normals(&mut rng, h * w);
    let sigma = fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt());
    let r = (4.0 * sigma).ceil() as i64;
    let mut total = 0.0;
    for di in -r..=r {
        for dj in -r..=r {
            total += (-((di * di + dj * dj) as f64) / (2.0 * sigma * sigma)).exp();
        }
    }
    let mut out = vec![0.0; h * w];
    for i in 0..h as i64 {
        for j in 0..w as i64 {
            let mut acc = 0.0;
            for di in -r..=r {
                for dj in -r..=r {
                    let (ii, jj) = (i + di, j + dj);
                    if ii >= 0 && jj >= 0 && ii < h as i64 && jj < w as i64 {
                        let k = (-((di * di + dj * dj) as f64) / (2.0 * sigma * sigma)).exp() / total;
                        acc += k * noise[(ii * w as i64 + jj) as usize];
                    }
                }
            }
            out[(i * w as i64 + j) as usize] = acc;
        }
    }
    let m = out.iter().sum::<f64>() / out.len() as f64;
    let sd = (out.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / out.len() as f64).sqrt();
    out.iter().map(|x| (x - m) / sd).collect()
}

fn lag1(field: &[f64], h: usize, w: usize) -> f64 {
    lag_correlation(field, h, w, 1)
}

#[test]
fn fwhm_constant() {
    assert!((FWHM_PER_SIGMA - 2.0 * (2.0 * 2f64.ln()).sqrt()).abs() < 1e-15);
}

#[test]
fn zero_fwhm_is_standardized_white_noise() {
    let spec = FieldSpec::gaussian(20, 30, 0.0);
    let f = gaussian_smooth_field(&spec, 4).unwrap();
    let mut rng = rng_for(4, &[]);
    let mut raw = standard_normals(&mut rng, 600);
    stats::standardize(&mut raw).unwrap();
    assert_eq!(f, raw);
}

#[test]
fn field_is_exactly_standardized() {
    let spec = FieldSpec::gaussian(33, 33, 9.0);
    let f = gaussian_smooth_field(&spec, 1).unwrap();
    assert_eq!(f.len(), 1089);
    assert!(stats::mean(&f).abs() < 1e-12);
    assert!((stats::std_dev(&f) - 1.0).abs() < 1e-12);
}

#[test]
fn separable_matches_direct_convolution() {
    let spec = FieldSpec::gaussian(17, 13, 4.0);
    let f = gaussian_smooth_field(&spec, 99).unwrap();
    let d = direct_field(17, 13, 4.0, 99);
    for (a, b) in f.iter().zip(&d) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn lag1_autocorrelation_matches_direct_oracle() {
    let spec = FieldSpec::gaussian(33, 33, 9.0);
    let n = 500;
    let (mut ours, mut oracle) = (0.0, 0.0);
    for r in 0..n {
        ours += lag1(&gaussian_smooth_field(&spec, r).unwrap(), 33, 33);
        // independent draws for the oracle
        oracle += lag1(&direct_field(33, 33, 9.0, 1_000_000 + r), 33, 33);
    }
    let (ours, oracle) = (ours / n as f64, oracle / n as f64);
    assert!((ours - oracle).abs() < 0.02, "ours {ours}, oracle {oracle}");
}

#[test]
fn spatial_correlation_decays() {
    let spec = FieldSpec::gaussian(33, 33, 9.0);
    let mut acc = [0.0; 3];
    for r in 0..500 {
        let f = gaussian_smooth_field(&spec, r).unwrap();
        for (a, lag) in acc.iter_mut().zip([1, 3, 6]) {
            *a += lag_correlation(&f, 33, 33, lag);
        }
    }
    assert!(acc[0] > acc[1] && acc[1] > acc[2], "{acc:?}");
}

#[test]
fn fields_are_deterministic() {
    let spec = FieldSpec::gamma(33, 33, 9.0, 0.02, 1e-4);
    assert_eq!(gamma_field(&spec, 5).unwrap(), gamma_field(&spec, 5).unwrap());
}

#[test]
fn gamma_moments_without_smoothing() {
    let spec = FieldSpec::gamma(250, 400, 0.0, 2.0, 1.0);
    let x = gamma_field_raw(&spec, 12).unwrap();
    assert!(x.iter().all(|&e| e >= 0.0));
    let m = stats::mean(&x);
    let v = stats::variance(&x);
    assert!((m - 2.0).abs() < 0.06, "mean {m}");
    assert!((v - 2.0).abs() < 0.06, "variance {v}");
}

#[test]
fn gamma_map_preserves_pixel_ranks() {
    let g = FieldSpec::gaussian(33, 33, 9.0);
    let spec = FieldSpec::gamma(33, 33, 9.0, 2.0, 1.0);
    let z = gaussian_smooth_field(&g, 77).unwrap();
    let x = gamma_field_raw(&spec, 77).unwrap();
    let order = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
        idx
    };
    assert_eq!(order(&z), order(&x));
}

#[test]
fn sparse_gamma_fields_have_the_reported_contrast_range() {
    let spec = FieldSpec::gamma(33, 33, 9.0, 0.02, 1e-4);
    let n = 40;
    let mut total = 0.0;
    for s in 0..n {
        let x = gamma_field(&spec, s).unwrap();
        assert!(stats::mean(&x).abs() < 1e-12);
        total += logistic_contrast(&x).unwrap();
    }
    let mean = total / n as f64;
    assert!((-1.17..=-0.87).contains(&mean), "mean contrast {mean}");
}

#[test]
fn iid_noise_rows_are_standardized() {
    let x = sample_gaussian_noise(1, 100_000, &NullSpec::Iid, 3).unwrap();
    assert!(stats::mean(x.row(0)).abs() < 0.02);
    assert!((stats::std_dev(x.row(0)) - 1.0).abs() < 0.02);
}

#[test]
fn unsmoothed_grf_noise_is_white() {
    let spec = NullSpec::Grf { height: 250, width: 400, fwhm: 0.0 };
    let x = sample_gaussian_noise(1, 100_000, &spec, 3).unwrap();
    assert!(lag1(x.row(0), 250, 400).abs() < 0.02);
}

#[test]
fn grf_noise_rows_match_direct_oracle_correlation() {
    let spec = NullSpec::Grf { height: 33, width: 33, fwhm: 9.0 };
    let x = sample_gaussian_noise(500, 1089, &spec, 8).unwrap();
    let ours = x.rows_iter().map(|r| lag1(r, 33, 33)).sum::<f64>() / 500.0;
    let oracle = (0..500).map(|r| lag1(&direct_field(33, 33, 9.0, 2_000_000 + r), 33, 33)).sum::<f64>() / 500.0;
    assert!((ours - oracle).abs() < 0.02, "ours {ours}, oracle {oracle}");
}
