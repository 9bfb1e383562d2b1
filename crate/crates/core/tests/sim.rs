use nglab_core::linalg::{singular_values, Matrix};
use nglab_core::sim::{
    allocate_variance, generate_dataset, make_group_templates, make_group_templates_raw, simulate_mixing_ar1,
    template_mask, MixingSpec, SimScenario, SvarPreset, DEFAULT_GROUP_SPLIT, MAX_MIXING_CONDITION,
};
use nglab_core::stats;
use proptest::prelude::*;

fn small_scenario(preset: SvarPreset, seed: u64) -> SimScenario {
    SimScenario { n_subjects: 4, ..SimScenario::standard(preset, seed) }
}

fn frob2(m: &Matrix) -> f64 {
    m.as_slice().iter().map(|e| e * e).sum()
}

#[test]
fn templates_shape_and_standardization() {
    let s = make_group_templates(33, 33, 1).unwrap();
    assert_eq!(s.shape(), (3, 1089));
    for r in s.rows_iter() {
        assert!(stats::mean(r).abs() < 1e-12);
        assert!((stats::std_dev(r) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn raw_templates_follow_their_masks() {
    let raw = make_group_templates_raw(33, 33, 2).unwrap();
    for d in 0..3 {
        let mask = template_mask(d, 33, 33).unwrap();
        let active: Vec<f64> = raw.row(d).iter().zip(&mask).filter(|(_, &m)| m).map(|(&x, _)| x).collect();
        let inactive: Vec<f64> = raw.row(d).iter().zip(&mask).filter(|(_, &m)| !m).map(|(&x, _)| x).collect();
        assert!(!active.is_empty());
        assert!(active.iter().all(|x| (0.5..=1.0).contains(x)));
        let sd = stats::std_dev(&inactive);
        assert!((sd / 0.001f64.sqrt() - 1.0).abs() < 0.2, "digit {d}: sd {sd}");
    }
}

#[test]
fn masks_rescale_and_reject_tiny_grids() {
    let m = template_mask(2, 66, 40).unwrap();
    assert_eq!(m.len(), 66 * 40);
    assert!(m.iter().any(|&b| b));
    assert!(template_mask(0, 8, 33).is_err());
    assert!(template_mask(3, 33, 33).is_err());
}

#[test]
fn preset_shares() {
    assert_eq!(SvarPreset::High.shares(), (0.335, 0.299, 0.366));
    assert_eq!(SvarPreset::Medium.shares(), (0.176, 0.386, 0.438));
    assert_eq!(SvarPreset::Low.shares(), (0.017, 0.46, 0.523));
    assert_eq!(DEFAULT_GROUP_SPLIT, [0.154, 0.298, 0.548]);
    assert_eq!(SvarPreset::from_name("medium"), Some(SvarPreset::Medium));
    assert_eq!(SvarPreset::from_name("extreme"), None);
}

#[test]
fn allocation_partitions_total_variance() {
    for p in SvarPreset::ALL {
        let t = allocate_variance(&p.spec(), 22, 25, 50.0).unwrap();
        assert!((t.total() - 50.0).abs() < 1e-12);
        let (g, i, n) = p.shares();
        assert!((t.group.iter().sum::<f64>() - 50.0 * g).abs() < 1e-12);
        assert!((t.group[0] - 50.0 * g * 0.154).abs() < 1e-12);
        assert!(t.individual.iter().all(|&x| (x - 50.0 * i / 22.0).abs() < 1e-12));
        assert!(t.noise.iter().all(|&x| (x - 50.0 * n / 25.0).abs() < 1e-12));
    }
}

#[test]
fn invalid_svar_rejected() {
    let mut s = SvarPreset::High.spec();
    s.noise_share = 0.5;
    assert!(allocate_variance(&s, 2, 2, 1.0).is_err());
    let mut s = SvarPreset::High.spec();
    s.within_group_split = vec![0.5, 0.6];
    assert!(allocate_variance(&s, 2, 2, 1.0).is_err());
}

#[test]
fn ar1_column_hits_target_exactly() {
    let spec = MixingSpec { ar_coefficient: 0.37, t: 50 };
    let c = simulate_mixing_ar1(&spec, 3.7, 4).unwrap();
    let ss: f64 = c.iter().map(|x| x * x).sum();
    assert!((ss - 3.7).abs() < 1e-12);
}

#[test]
fn ar1_long_path_autocorrelation() {
    for (phi, seed) in [(0.37, 1), (0.0, 2)] {
        let spec = MixingSpec { ar_coefficient: phi, t: 100_000 };
        let c = simulate_mixing_ar1(&spec, 1.0, seed).unwrap();
        let r = stats::autocorrelation(&c, 1);
        assert!((r - phi).abs() < 0.01, "phi {phi}: lag-1 {r}");
    }
}

#[test]
fn nonstationary_mixing_rejected() {
    let spec = MixingSpec { ar_coefficient: 1.0, t: 10 };
    assert!(simulate_mixing_ar1(&spec, 1.0, 0).is_err());
}

#[test]
fn dataset_structure_and_reconstruction() {
    let sc = small_scenario(SvarPreset::High, 3);
    let d = generate_dataset(&sc).unwrap();
    assert_eq!(d.subjects.len(), 4);
    for (i, x) in d.subjects.iter().enumerate() {
        assert_eq!(x.values().shape(), (50, 1089));
        let rebuilt = d.reconstruct(i).unwrap();
        assert!(rebuilt.sub(x.values()).unwrap().max_abs() < 1e-12);
        assert_eq!(d.truth_individual[i].shape(), (22, 1089));
        assert_eq!(d.truth_noise[i].shape(), (25, 1089));
        for r in d.truth_individual[i].rows_iter().chain(d.truth_noise[i].rows_iter()) {
            assert!(stats::mean(r).abs() < 1e-12 && (stats::std_dev(r) - 1.0).abs() < 1e-12);
        }
        let m = &d.truth_mixing[i];
        let full = Matrix::hstack(&[&m.group, &m.individual, &m.noise]).unwrap();
        let sv = singular_values(&full);
        assert!(sv[0] <= MAX_MIXING_CONDITION * sv[49]);
    }
}

#[test]
fn realized_shares_match_preset() {
    for p in SvarPreset::ALL {
        let d = generate_dataset(&small_scenario(p, 10)).unwrap();
        let (g, i, n) = p.shares();
        for (k, m) in d.truth_mixing.iter().enumerate() {
            // trace(MM') is the column sum of squares: exact
            assert!((frob2(&m.group) - 50.0 * g).abs() < 1e-10);
            assert!((frob2(&m.individual) - 50.0 * i).abs() < 1e-10);
            assert!((frob2(&m.noise) - 50.0 * n).abs() < 1e-10);
            // realized data variance shares, off only by signal cross-correlation
            let parts = [
                m.group.matmul(&d.truth_group).unwrap(),
                m.individual.matmul(&d.truth_individual[k]).unwrap(),
                m.noise.matmul(&d.truth_noise[k]).unwrap(),
            ];
            let vars: Vec<f64> = parts.iter().map(frob2).collect();
            let total: f64 = vars.iter().sum();
            for (v, want) in vars.iter().zip([g, i, n]) {
                assert!((v / total - want).abs() <= 0.02, "{p:?} subject {k}: {} vs {want}", v / total);
            }
        }
    }
}

#[test]
fn dataset_is_deterministic() {
    let sc = small_scenario(SvarPreset::Low, 5);
    assert_eq!(generate_dataset(&sc).unwrap(), generate_dataset(&sc).unwrap());
}

#[test]
fn standard_scenario_counts() {
    let sc = SimScenario::standard(SvarPreset::Medium, 0);
    assert_eq!((sc.n_subjects, sc.t(), sc.q_subject(), sc.v()), (20, 50, 25, 1089));
    let mut bad = sc.clone();
    bad.q_g = 2;
    assert!(bad.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn allocation_is_scale_equivariant(total in 0.1f64..100.0, qi in 1usize..30, nn in 1usize..30) {
        let spec = SvarPreset::Medium.spec();
        let a = allocate_variance(&spec, qi, nn, total).unwrap();
        let b = allocate_variance(&spec, qi, nn, 2.0 * total).unwrap();
        let flat = |t: &nglab_core::sim::VarianceTargets| {
            t.group.iter().chain(&t.individual).chain(&t.noise).copied().collect::<Vec<_>>()
        };
        for (x, y) in flat(&a).iter().zip(flat(&b)) {
            prop_assert!((2.0 * x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
        prop_assert!((a.total() - total).abs() < 1e-9 * total);
    }

    #[test]
    fn ar1_rescale_is_exact(phi in -0.95f64..0.95, target in 0.01f64..50.0, seed in any::<u64>()) {
        let c = simulate_mixing_ar1(&MixingSpec { ar_coefficient: phi, t: 40 }, target, seed).unwrap();
        let ss: f64 = c.iter().map(|x| x * x).sum();
        prop_assert!((ss - target).abs() < 1e-12 * target.max(1.0));
    }
}
