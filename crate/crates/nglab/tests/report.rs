use std::collections::BTreeMap;

use nglab::config::{Settings, StudyConfig};
use nglab::report::{
    aggregate, summarize_k_hats, summarize_recovery, ExperimentReport, RecoveryRecord, ReplicationRecord, Status,
};
use proptest::prelude::*;

fn config() -> StudyConfig {
    StudyConfig::resolve(Settings { preset: Some("medium".into()), reps: Some(3), ..Settings::default() }).unwrap()
}

fn ok_record(index: usize, corr: [Option<f64>; 3], grf: Vec<usize>) -> ReplicationRecord {
    ReplicationRecord {
        index,
        seed: 100 + index as u64,
        status: Status::Ok,
        error: None,
        k_hat: BTreeMap::from([("grf".to_string(), grf)]),
        q_used: vec![25, 25],
        recovery: vec![RecoveryRecord { method: "group_lngca".into(), q_g: 3, correlations: corr.to_vec() }],
        runtime_seconds: None,
    }
}

fn sample_report() -> ExperimentReport {
    let reps = vec![
        ok_record(0, [Some(0.99), Some(0.1 + 0.2), Some(1.0 / 3.0)], vec![25, 24]),
        ReplicationRecord::failed(1, 101, "singular".into()),
        ok_record(2, [Some(0.97), None, Some(0.5)], vec![25, 23]),
        ok_record(3, [Some(0.95), Some(0.8), Some(0.7)], vec![22, 25]),
    ];
    ExperimentReport::new(config(), reps).unwrap()
}

/// Naive quantile with linear interpolation between order statistics.
fn quantile_oracle(x: &[usize], p: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort();
    let h = (s.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    s[lo] as f64 + (h - lo as f64) * (s[hi] as f64 - s[lo] as f64)
}

#[test]
fn json_round_trip_is_byte_identical() {
    let r = sample_report();
    let text = r.to_json().unwrap();
    let back = ExperimentReport::from_json(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.to_json().unwrap(), text);
}

#[test]
fn tampered_aggregates_rejected() {
    let mut r = sample_report();
    r.aggregates.recovery[0].components[1].mean += 1e-12;
    assert!(ExperimentReport::from_json(&r.to_json().unwrap()).is_err());
    let mut r = sample_report();
    r.aggregates.n_failed = 0;
    assert!(ExperimentReport::from_json(&r.to_json().unwrap()).is_err());
    let mut r = sample_report();
    r.replications[0].k_hat.get_mut("grf").unwrap()[0] = 3;
    assert!(ExperimentReport::from_json(&r.to_json().unwrap()).is_err());
}

#[test]
fn schema_version_and_unknown_fields_checked() {
    let text = sample_report().to_json().unwrap();
    assert!(ExperimentReport::from_json(&text.replacen("\"schema_version\": 1", "\"schema_version\": 9", 1)).is_err());
    assert!(ExperimentReport::from_json(&text.replacen('{', "{\"extra\": 1,", 1)).is_err());
}

#[test]
fn aggregates_skip_failed_replications() {
    let r = sample_report();
    assert_eq!((r.aggregates.n_ok, r.aggregates.n_failed), (3, 1));
    let d = r.dimension("grf").unwrap();
    assert_eq!(d.n, 6);
    assert_eq!(d.histogram, BTreeMap::from([(22, 1), (23, 1), (24, 1), (25, 3)]));
    assert_eq!(d.mode, 25);
    let rec = r.recovery("group_lngca", 3).unwrap();
    assert_eq!(rec.n, 3);
    // unmatched counts as zero
    let c = &rec.components[1];
    let x = [0.1 + 0.2, 0.0, 0.8];
    let mean = x.iter().sum::<f64>() / 3.0;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
    assert!((c.mean - mean).abs() < 1e-15 && (c.sd - sd).abs() < 1e-15);
    assert_eq!((c.min, c.n_matched), (0.0, 2));
    // total errors 1.377, 1.53, 0.55: the median is replication 0
    assert_eq!(rec.median_error_replication, 0);
}

#[test]
fn written_tables_match_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let r = sample_report();
    r.write_dir(dir.path()).unwrap();
    assert_eq!(ExperimentReport::load(&dir.path().join("report.json")).unwrap(), r);
    let hist = std::fs::read_to_string(dir.path().join("dimension_histogram.csv")).unwrap();
    assert_eq!(hist, "method,k,count\ngrf,22,1\ngrf,23,1\ngrf,24,1\ngrf,25,3\n");
    let recs = std::fs::read_to_string(dir.path().join("recovery_records.csv")).unwrap();
    assert_eq!(recs.lines().count(), 1 + 9);
    assert!(recs.contains("2,group_lngca,3,1,\n"));
    let k = std::fs::read_to_string(dir.path().join("k_hat.csv")).unwrap();
    assert_eq!(k.lines().count(), 1 + 6);
}

#[test]
fn mixed_recovery_records_rejected() {
    let a = RecoveryRecord { method: "m".into(), q_g: 3, correlations: vec![Some(0.9); 3] };
    let b = RecoveryRecord { method: "m".into(), q_g: 2, correlations: vec![Some(0.9); 3] };
    let c = RecoveryRecord { method: "m".into(), q_g: 3, correlations: vec![Some(0.9); 2] };
    assert!(summarize_recovery(&[(0, &a), (1, &b)]).is_err());
    assert!(summarize_recovery(&[(0, &a), (1, &c)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k_hat_summary_matches_oracle(ks in proptest::collection::vec(0usize..40, 1..60)) {
        let d = summarize_k_hats("grf", &ks).unwrap();
        prop_assert_eq!(d.histogram.values().sum::<usize>(), ks.len());
        let top = ks.iter().map(|k| ks.iter().filter(|&x| x == k).count()).max().unwrap();
        let mode = ks.iter().copied().filter(|k| ks.iter().filter(|&x| x == k).count() == top).min().unwrap();
        prop_assert_eq!(d.mode, mode);
        prop_assert!((d.q1 - quantile_oracle(&ks, 0.25)).abs() < 1e-12);
        prop_assert!((d.median - quantile_oracle(&ks, 0.5)).abs() < 1e-12);
        prop_assert!((d.q3 - quantile_oracle(&ks, 0.75)).abs() < 1e-12);
    }

    #[test]
    fn any_report_round_trips(corrs in proptest::collection::vec(proptest::option::of(0.0f64..=1.0), 3..=15)) {
        let reps: Vec<ReplicationRecord> = corrs
            .chunks_exact(3)
            .enumerate()
            .map(|(i, c)| ok_record(i, [c[0], c[1], c[2]], vec![i, 25]))
            .collect();
        let r = ExperimentReport::new(config(), reps.clone()).unwrap();
        prop_assert_eq!(&r.aggregates, &aggregate(&reps).unwrap());
        let text = r.to_json().unwrap();
        let back = ExperimentReport::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), text);
    }
}
