//! Experiment reports: per-replication records, the summaries derived from
//! them, and their JSON and CSV forms.
//!
//! Floats are written with 17 significant digits, so parsing and writing a
//! report reproduces it byte for byte. Loading recomputes every aggregate
//! from the records and rejects the file if anything differs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use nglab_core::dimtest::DimTestReport;
use nglab_core::eval::MatchResult;
use nglab_core::stats;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::StudyConfig;
use crate::error::{Error, Result};
use crate::io::{create_dir, write_text};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub scenario: String,
    pub config: StudyConfig,
    /// Variance weight of each true group component, in truth order.
    pub truth_weights: Vec<f64>,
    pub replications: Vec<ReplicationRecord>,
    pub aggregates: Aggregates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationRecord {
    pub index: usize,
    /// Seed of the simulated dataset.
    pub seed: u64,
    pub status: Status,
    pub error: Option<String>,
    /// Null name → k̂ per subject.
    pub k_hat: BTreeMap<String, Vec<usize>>,
    /// Dimensions handed to group LNGCA, per subject.
    pub q_used: Vec<usize>,
    pub recovery: Vec<RecoveryRecord>,
    pub runtime_seconds: Option<BTreeMap<String, f64>>,
}

impl ReplicationRecord {
    pub fn failed(index: usize, seed: u64, error: String) -> Self {
        ReplicationRecord {
            index,
            seed,
            status: Status::Failed,
            error: Some(error),
            k_hat: BTreeMap::new(),
            q_used: Vec::new(),
            recovery: Vec::new(),
            runtime_seconds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryRecord {
    pub method: String,
    pub q_g: usize,
    /// Matched |corr| per true component; `None` when left unmatched.
    pub correlations: Vec<Option<f64>>,
}

impl RecoveryRecord {
    pub fn from_match(method: &str, q_g: usize, m: &MatchResult) -> Self {
        RecoveryRecord { method: method.to_string(), q_g, correlations: m.truth_correlations.clone() }
    }

    /// Unmatched components count as zero correlation.
    pub fn scores(&self) -> Vec<f64> {
        self.correlations.iter().map(|c| c.unwrap_or(0.0)).collect()
    }

    /// Σ_j (1 − |corr_j|).
    pub fn total_error(&self) -> f64 {
        self.scores().iter().map(|c| 1.0 - c).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregates {
    pub n_ok: usize,
    pub n_failed: usize,
    pub dimension: Vec<DimSummary>,
    pub recovery: Vec<RecoverySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimSummary {
    pub method: String,
    pub n: usize,
    pub histogram: BTreeMap<usize, usize>,
    /// Most frequent k̂; the smallest on ties.
    pub mode: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSummary {
    pub component: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single replication.
    pub sd: f64,
    pub min: f64,
    pub n_matched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverySummary {
    pub method: String,
    pub q_g: usize,
    pub n: usize,
    pub components: Vec<ComponentSummary>,
    /// Replication whose total matching error is the (lower) median.
    pub median_error_replication: usize,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Report(msg.into())
}

/// Frequency table, mode and quartiles of one method's k̂ values.
pub fn summarize_k_hats(method: &str, k_hats: &[usize]) -> Result<DimSummary> {
    if k_hats.is_empty() {
        return Err(invalid(format!("no dimension estimates for '{method}'")));
    }
    let mut histogram = BTreeMap::new();
    for &k in k_hats {
        *histogram.entry(k).or_insert(0) += 1;
    }
    let top = *histogram.values().max().unwrap();
    let mode = *histogram.iter().find(|(_, &c)| c == top).unwrap().0;
    let x: Vec<f64> = k_hats.iter().map(|&k| k as f64).collect();
    Ok(DimSummary {
        method: method.to_string(),
        n: k_hats.len(),
        histogram,
        mode,
        q1: stats::quantile(&x, 0.25),
        median: stats::quantile(&x, 0.5),
        q3: stats::quantile(&x, 0.75),
    })
}

/// One summary per method, in the given order.
pub fn summarize_dim_experiment(groups: &[(&str, &[DimTestReport])]) -> Result<Vec<DimSummary>> {
    if groups.is_empty() {
        return Err(invalid("no dimension-test groups"));
    }
    groups
        .iter()
        .map(|(method, reports)| summarize_k_hats(method, &reports.iter().map(|r| r.k_hat).collect::<Vec<_>>()))
        .collect()
}

/// Per-component statistics over `(replication index, record)` pairs.
pub fn summarize_recovery(records: &[(usize, &RecoveryRecord)]) -> Result<RecoverySummary> {
    let (_, first) = records.first().ok_or_else(|| invalid("no recovery records"))?;
    let q_true = first.correlations.len();
    for (i, r) in records {
        if r.method != first.method || r.q_g != first.q_g {
            return Err(invalid(format!("replication {i} mixes methods or q_g values")));
        }
        if r.correlations.len() != q_true {
            return Err(invalid(format!(
                "replication {i} has {} components, expected {q_true}",
                r.correlations.len()
            )));
        }
    }
    let components = (0..q_true)
        .map(|j| {
            let x: Vec<f64> = records.iter().map(|(_, r)| r.correlations[j].unwrap_or(0.0)).collect();
            let n = x.len() as f64;
            let sd = if x.len() > 1 { (stats::variance(&x) * n / (n - 1.0)).sqrt() } else { 0.0 };
            ComponentSummary {
                component: j,
                mean: stats::mean(&x),
                sd,
                min: x.iter().copied().fold(f64::INFINITY, f64::min),
                n_matched: records.iter().filter(|(_, r)| r.correlations[j].is_some()).count(),
            }
        })
        .collect();
    let mut by_error: Vec<(f64, usize)> = records.iter().map(|(i, r)| (r.total_error(), *i)).collect();
    by_error.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(RecoverySummary {
        method: first.method.clone(),
        q_g: first.q_g,
        n: records.len(),
        components,
        median_error_replication: by_error[(by_error.len() - 1) / 2].1,
    })
}

/// Aggregates over the successful replications. Dimension methods are
/// ordered by name, recovery summaries by first appearance.
pub fn aggregate(records: &[ReplicationRecord]) -> Result<Aggregates> {
    let ok: Vec<&ReplicationRecord> = records.iter().filter(|r| r.status == Status::Ok).collect();
    let mut k_by_method: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut rec_by_key: Vec<((&str, usize), Vec<(usize, &RecoveryRecord)>)> = Vec::new();
    for r in &ok {
        for (m, ks) in &r.k_hat {
            k_by_method.entry(m).or_default().extend(ks);
        }
        for rec in &r.recovery {
            let key = (rec.method.as_str(), rec.q_g);
            match rec_by_key.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push((r.index, rec)),
                None => rec_by_key.push((key, vec![(r.index, rec)])),
            }
        }
    }
    Ok(Aggregates {
        n_ok: ok.len(),
        n_failed: records.len() - ok.len(),
        dimension: k_by_method.iter().map(|(m, ks)| summarize_k_hats(m, ks)).collect::<Result<_>>()?,
        recovery: rec_by_key.iter().map(|(_, v)| summarize_recovery(v)).collect::<Result<_>>()?,
    })
}

/// Pretty JSON whose floats carry 17 significant digits.
struct ReportFormatter(PrettyFormatter<'static>);

impl Formatter for ReportFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes any value with the report float format.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ReportFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| invalid(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl ExperimentReport {
    pub fn new(config: StudyConfig, replications: Vec<ReplicationRecord>) -> Result<Self> {
        let aggregates = aggregate(&replications)?;
        Ok(ExperimentReport {
            schema_version: SCHEMA_VERSION,
            scenario: config.name.clone(),
            truth_weights: config.within_group_split.clone(),
            config,
            replications,
            aggregates,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    /// Parses and checks the schema version and every aggregate.
    pub fn from_json(text: &str) -> Result<Self> {
        let r: ExperimentReport = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!("unsupported schema_version {}", r.schema_version)));
        }
        r.check_consistency()?;
        Ok(r)
    }

    pub fn check_consistency(&self) -> Result<()> {
        if aggregate(&self.replications)? != self.aggregates {
            return Err(invalid("aggregates do not match the replication records"));
        }
        Ok(())
    }

    pub fn dimension(&self, method: &str) -> Option<&DimSummary> {
        self.aggregates.dimension.iter().find(|d| d.method == method)
    }

    pub fn recovery(&self, method: &str, q_g: usize) -> Option<&RecoverySummary> {
        self.aggregates.recovery.iter().find(|r| r.method == method && r.q_g == q_g)
    }

    /// `method,k,count`
    pub fn dimension_histogram_csv(&self) -> String {
        let mut out = String::from("method,k,count\n");
        for d in &self.aggregates.dimension {
            for (k, c) in &d.histogram {
                writeln!(out, "{},{k},{c}", d.method).unwrap();
            }
        }
        out
    }

    /// `method,statistic,value`
    pub fn dimension_summary_csv(&self) -> String {
        let mut out = String::from("method,statistic,value\n");
        for d in &self.aggregates.dimension {
            writeln!(out, "{},n,{}", d.method, d.n).unwrap();
            writeln!(out, "{},mode,{}", d.method, d.mode).unwrap();
            for (name, v) in [("q1", d.q1), ("median", d.median), ("q3", d.q3)] {
                writeln!(out, "{},{name},{}", d.method, csv_float(v)).unwrap();
            }
        }
        out
    }

    /// `method,q_g,component,statistic,value`
    pub fn recovery_summary_csv(&self) -> String {
        let mut out = String::from("method,q_g,component,statistic,value\n");
        for r in &self.aggregates.recovery {
            for c in &r.components {
                let prefix = format!("{},{},{}", r.method, r.q_g, c.component);
                for (name, v) in [("mean", c.mean), ("sd", c.sd), ("min", c.min)] {
                    writeln!(out, "{prefix},{name},{}", csv_float(v)).unwrap();
                }
                writeln!(out, "{prefix},n_matched,{}", c.n_matched).unwrap();
            }
        }
        out
    }

    /// `replication,method,q_g,component,abs_corr` with empty cells for
    /// unmatched components.
    pub fn recovery_records_csv(&self) -> String {
        let mut out = String::from("replication,method,q_g,component,abs_corr\n");
        for rep in &self.replications {
            for r in &rep.recovery {
                for (j, c) in r.correlations.iter().enumerate() {
                    let v = c.map(csv_float).unwrap_or_default();
                    writeln!(out, "{},{},{},{j},{v}", rep.index, r.method, r.q_g).unwrap();
                }
            }
        }
        out
    }

    /// `replication,subject,method,k_hat`
    pub fn k_hat_csv(&self) -> String {
        let mut out = String::from("replication,subject,method,k_hat\n");
        for rep in &self.replications {
            for (m, ks) in &rep.k_hat {
                for (s, k) in ks.iter().enumerate() {
                    writeln!(out, "{},{s},{m},{k}", rep.index).unwrap();
                }
            }
        }
        out
    }

    /// Writes `report.json` and the CSV tables into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        create_dir(dir)?;
        write_text(&dir.join("report.json"), &self.to_json()?)?;
        write_text(&dir.join("dimension_histogram.csv"), &self.dimension_histogram_csv())?;
        write_text(&dir.join("dimension_summary.csv"), &self.dimension_summary_csv())?;
        write_text(&dir.join("recovery_summary.csv"), &self.recovery_summary_csv())?;
        write_text(&dir.join("recovery_records.csv"), &self.recovery_records_csv())?;
        write_text(&dir.join("k_hat.csv"), &self.k_hat_csv())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
