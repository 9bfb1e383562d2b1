//! Simulation studies: generate → estimate dimensions → group LNGCA and the
//! PCA+ICA baseline → match against the planted templates.

use std::collections::BTreeMap;
use std::time::Instant;

use nglab_core::dimtest::estimate_ng_dimension_with;
use nglab_core::eval::match_components;
use nglab_core::ica::FastIcaOptions;
use nglab_core::par::par_map;
use nglab_core::pipeline::{
    extract_subject_components, fit_group_from_components, fit_group_ica_baseline, GroupOptions, SubjectData,
    SubjectReduction,
};
use nglab_core::rng::derive_seed;
use nglab_core::sim::{generate_dataset, SimulatedDataset};

use crate::config::{DimSetting, NullKind, StudyConfig};
use crate::error::Result;
use crate::nulls::NullCache;
use crate::report::{ExperimentReport, RecoveryRecord, ReplicationRecord, Status};

pub const LNGCA: &str = "group_lngca";
pub const BASELINE: &str = "group_ica";

/// Seed of replication `r`'s dataset.
pub fn dataset_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, &[0, r as u64])
}

/// Seed of replication `r`'s decompositions.
pub fn fit_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, &[1, r as u64])
}

/// Seed of the null resamples, shared by every subject and replication.
pub fn null_seed(seed: u64) -> u64 {
    derive_seed(seed, &[2])
}

pub fn group_options(cfg: &StudyConfig, seed: u64) -> GroupOptions {
    GroupOptions {
        subject: FastIcaOptions::default().with_restarts(cfg.restarts),
        group: FastIcaOptions::default().with_restarts(cfg.group_restarts),
        individual: cfg.individual,
    }
    .with_seed(seed)
}

/// k̂ for every subject under one null.
pub fn estimate_dimensions(
    cfg: &StudyConfig,
    subjects: &[SubjectData],
    kind: NullKind,
    cache: &NullCache,
) -> Result<Vec<usize>> {
    let dc = cfg.dim_config(kind, null_seed(cfg.seed));
    par_map(subjects.len(), |i| estimate_ng_dimension_with(subjects[i].whitened(), &dc, cache).map(|r| r.k_hat))
        .into_iter()
        .collect::<nglab_core::Result<Vec<_>>>()
        .map_err(Into::into)
}

struct Timer(Option<BTreeMap<String, f64>>);

impl Timer {
    fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if let Some(m) = &mut self.0 {
            *m.entry(label.to_string()).or_insert(0.0) += start.elapsed().as_secs_f64();
        }
        out
    }
}

/// Runs one replication on an already generated dataset.
pub fn analyze_dataset(
    cfg: &StudyConfig,
    data: &SimulatedDataset,
    index: usize,
    cache: &NullCache,
) -> Result<ReplicationRecord> {
    let mut timer = Timer(cfg.timings.then(BTreeMap::new));
    let subjects = timer.time("whiten", || {
        par_map(data.subjects.len(), |i| SubjectData::from_raw(data.subjects[i].values()))
            .into_iter()
            .collect::<nglab_core::Result<Vec<_>>>()
    })?;

    let mut k_hat = BTreeMap::new();
    let mut nulls = cfg.dim_nulls.clone();
    if cfg.dim == DimSetting::Auto && !nulls.contains(&NullKind::Grf) {
        nulls.push(NullKind::Grf);
    }
    nulls.sort();
    for kind in nulls {
        let ks = timer.time("dimension", || estimate_dimensions(cfg, &subjects, kind, cache))?;
        k_hat.insert(kind.name().to_string(), ks);
    }
    let max_qg = *cfg.qg.iter().max().expect("validated");
    let q_used: Vec<usize> = match cfg.dim {
        DimSetting::Fixed(n) => vec![n; subjects.len()],
        // a subject cannot carry fewer NG components than the group
        DimSetting::Auto => k_hat["grf"].iter().map(|&k| k.max(max_qg)).collect(),
    };

    let opts = group_options(cfg, fit_seed(cfg.seed, index));
    let comps = timer.time("lngca", || extract_subject_components(&subjects, &q_used, &opts.subject))?;
    let mut recovery = Vec::new();
    for &q_g in &cfg.qg {
        let fit = timer.time("lngca", || fit_group_from_components(&subjects, &comps, q_g, &opts))?;
        recovery.push(RecoveryRecord::from_match(LNGCA, q_g, &match_components(&fit.s_g, &data.truth_group)?));
        let reduction = SubjectReduction::VarianceFraction(cfg.baseline_variance);
        let base = timer.time("baseline", || fit_group_ica_baseline(&subjects, reduction, q_g, &opts.group))?;
        recovery.push(RecoveryRecord::from_match(BASELINE, q_g, &match_components(&base.s_g, &data.truth_group)?));
    }
    Ok(ReplicationRecord {
        index,
        seed: dataset_seed(cfg.seed, index),
        status: Status::Ok,
        error: None,
        k_hat,
        q_used,
        recovery,
        runtime_seconds: timer.0,
    })
}

/// Generates and analyzes replication `index`, turning any failure into a
/// failed record.
pub fn run_replication(cfg: &StudyConfig, index: usize, cache: &NullCache) -> ReplicationRecord {
    let seed = dataset_seed(cfg.seed, index);
    let start = Instant::now();
    let outcome = generate_dataset(&cfg.scenario(seed)).map_err(Into::into).and_then(|data| {
        let mut rec = analyze_dataset(cfg, &data, index, cache)?;
        if let Some(t) = &mut rec.runtime_seconds {
            t.insert("total".into(), start.elapsed().as_secs_f64());
        }
        Ok(rec)
    });
    outcome.unwrap_or_else(|e: crate::error::Error| ReplicationRecord::failed(index, seed, e.to_string()))
}

/// Runs every replication in order; `progress` sees each finished record.
pub fn run_study_with(
    cfg: &StudyConfig,
    cache: &NullCache,
    mut progress: impl FnMut(&ReplicationRecord),
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut records = Vec::with_capacity(cfg.reps);
    for r in 0..cfg.reps {
        let rec = run_replication(cfg, r, cache);
        progress(&rec);
        records.push(rec);
    }
    ExperimentReport::new(cfg.clone(), records)
}

pub fn run_study(cfg: &StudyConfig) -> Result<ExperimentReport> {
    run_study_with(cfg, &NullCache::new(), |_| {})
}
