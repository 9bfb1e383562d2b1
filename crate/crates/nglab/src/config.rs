//! Run settings. Values are layered: preset defaults, then a TOML file, then
//! command-line flags, each layer overriding the one before.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nglab_core::dimtest::{DimTestConfig, NullSpec};
use nglab_core::sim::{SimScenario, SvarPreset};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullKind {
    Grf,
    Iid,
}

impl NullKind {
    pub fn name(self) -> &'static str {
        match self {
            NullKind::Grf => "grf",
            NullKind::Iid => "iid",
        }
    }
}

impl FromStr for NullKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "grf" => Ok(NullKind::Grf),
            "iid" => Ok(NullKind::Iid),
            _ => Err(format!("unknown null '{s}' (expected grf or iid)")),
        }
    }
}

/// Per-subject non-Gaussian dimension: fixed, or estimated by the grf-null test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimSetting {
    Fixed(usize),
    Auto,
}

impl FromStr for DimSetting {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(DimSetting::Auto);
        }
        s.parse().map(DimSetting::Fixed).map_err(|_| format!("expected a count or 'auto', got '{s}'"))
    }
}

impl fmt::Display for DimSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimSetting::Fixed(n) => write!(f, "{n}"),
            DimSetting::Auto => f.write_str("auto"),
        }
    }
}

impl Serialize for DimSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DimSetting::Fixed(n) => s.serialize_u64(*n as u64),
            DimSetting::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for DimSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(DimSetting::Fixed(n)),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Image grid, written `HxW`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub height: usize,
    pub width: usize,
}

impl Grid {
    pub fn n_pixels(&self) -> usize {
        self.height * self.width
    }
}

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("expected a grid like 33x33, got '{s}'");
        let (h, w) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let height = h.trim().parse().map_err(|_| bad())?;
        let width = w.trim().parse().map_err(|_| bad())?;
        Ok(Grid { height, width })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Comma-separated list on the command line, integer or array in TOML.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QgList(pub Vec<usize>);

impl FromStr for QgList {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| format!("expected q_g values like 3 or 2,3,4, got '{s}'")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(QgList)
    }
}

impl<'de> Deserialize<'de> for QgList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(usize),
            Many(Vec<usize>),
        }
        Ok(QgList(match Raw::deserialize(d)? {
            Raw::One(n) => vec![n],
            Raw::Many(v) => v,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvarShares {
    pub group: f64,
    pub individual: f64,
    pub noise: f64,
}

/// One layer of settings; unset fields fall through to lower layers.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub name: Option<String>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub subjects: Option<usize>,
    pub qg: Option<QgList>,
    pub dim: Option<DimSetting>,
    #[serde(alias = "B")]
    pub b: Option<usize>,
    pub alpha: Option<f64>,
    pub restarts: Option<usize>,
    pub group_restarts: Option<usize>,
    pub fwhm: Option<f64>,
    pub grid: Option<Grid>,
    pub ar_coefficient: Option<f64>,
    pub baseline_variance: Option<f64>,
    pub dim_nulls: Option<Vec<NullKind>>,
    pub individual: Option<bool>,
    pub timings: Option<bool>,
    pub svar: Option<SvarShares>,
    pub within_group_split: Option<Vec<f64>>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|msg| Error::format(path, msg))
    }

    /// `top` wins wherever it is set.
    pub fn overlay(self, top: Settings) -> Settings {
        let base = self;
        overlay_fields!(base, top; name, preset, seed, reps, subjects, qg, dim, b, alpha, restarts,
            group_restarts, fwhm, grid, ar_coefficient, baseline_variance, dim_nulls, individual,
            timings, svar, within_group_split)
    }
}

/// Fully resolved settings for `simulate` and `run-study`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub name: String,
    pub preset: String,
    pub seed: u64,
    pub reps: usize,
    pub subjects: usize,
    pub qg: Vec<usize>,
    pub dim: DimSetting,
    #[serde(rename = "B")]
    pub b: usize,
    pub alpha: f64,
    pub restarts: usize,
    pub group_restarts: usize,
    pub fwhm: f64,
    pub grid: Grid,
    pub ar_coefficient: f64,
    /// Subject variance fraction kept by the baseline's PCA.
    pub baseline_variance: f64,
    /// Nulls whose dimension estimates are recorded for every subject.
    pub dim_nulls: Vec<NullKind>,
    /// Run the individual-component step.
    pub individual: bool,
    pub timings: bool,
    pub svar: SvarShares,
    pub within_group_split: Vec<f64>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_preset(name: &str) -> Result<SvarPreset> {
    SvarPreset::from_name(name).ok_or_else(|| usage(format!("unknown preset '{name}' (expected high, medium or low)")))
}

impl StudyConfig {
    pub fn resolve(s: Settings) -> Result<Self> {
        let preset_name = s.preset.clone().ok_or_else(|| usage("a preset is required (--preset or the config file)"))?;
        let preset = parse_preset(&preset_name)?;
        let base = SimScenario::standard(preset, 0);
        let (g, i, n) = preset.shares();
        let c = StudyConfig {
            name: s.name.unwrap_or_else(|| preset_name.clone()),
            preset: preset_name,
            seed: s.seed.unwrap_or(0),
            reps: s.reps.unwrap_or(40),
            subjects: s.subjects.unwrap_or(base.n_subjects),
            qg: s.qg.map(|q| q.0).unwrap_or_else(|| vec![base.q_g]),
            dim: s.dim.unwrap_or(DimSetting::Fixed(base.q_subject())),
            b: s.b.unwrap_or(200),
            alpha: s.alpha.unwrap_or(0.05),
            restarts: s.restarts.unwrap_or(30),
            group_restarts: s.group_restarts.unwrap_or(100),
            fwhm: s.fwhm.unwrap_or(base.fwhm),
            grid: s.grid.unwrap_or(Grid { height: base.height, width: base.width }),
            ar_coefficient: s.ar_coefficient.unwrap_or(base.mixing.ar_coefficient),
            baseline_variance: s.baseline_variance.unwrap_or(0.82),
            dim_nulls: s.dim_nulls.unwrap_or_default(),
            individual: s.individual.unwrap_or(false),
            timings: s.timings.unwrap_or(false),
            svar: s.svar.unwrap_or(SvarShares { group: g, individual: i, noise: n }),
            within_group_split: s.within_group_split.unwrap_or_else(|| base.svar.within_group_split.clone()),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        parse_preset(&self.preset)?;
        if self.reps == 0 {
            return Err(usage("--reps must be at least 1"));
        }
        if self.subjects < 2 {
            return Err(usage("at least 2 subjects are required"));
        }
        if self.qg.is_empty() || self.qg.contains(&0) {
            return Err(usage("--qg values must be at least 1"));
        }
        let t = self.scenario(0).t();
        let max_qg = *self.qg.iter().max().unwrap();
        if let DimSetting::Fixed(n) = self.dim {
            if n < max_qg || n > t {
                return Err(usage(format!("--dim {n} must lie in {max_qg}..={t}")));
            }
        }
        if self.b == 0 {
            return Err(usage("--B must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(usage(format!("--alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.restarts == 0 || self.group_restarts == 0 {
            return Err(usage("restart counts must be at least 1"));
        }
        if !(self.baseline_variance > 0.0 && self.baseline_variance <= 1.0) {
            return Err(usage(format!("baseline_variance must lie in (0, 1], got {}", self.baseline_variance)));
        }
        self.scenario(0).validate().map_err(|e| usage(e.to_string()))
    }

    pub fn scenario(&self, seed: u64) -> SimScenario {
        let mut sc = SimScenario::standard(SvarPreset::Medium, seed);
        sc.n_subjects = self.subjects;
        sc.svar.group_share = self.svar.group;
        sc.svar.individual_share = self.svar.individual;
        sc.svar.noise_share = self.svar.noise;
        sc.svar.within_group_split = self.within_group_split.clone();
        sc.mixing.ar_coefficient = self.ar_coefficient;
        sc.height = self.grid.height;
        sc.width = self.grid.width;
        sc.fwhm = self.fwhm;
        sc
    }

    pub fn dim_config(&self, kind: NullKind, seed: u64) -> DimTestConfig {
        dim_config(kind, self.b, self.alpha, seed, Some(self.grid), self.fwhm)
    }
}

pub fn dim_config(kind: NullKind, b: usize, alpha: f64, seed: u64, grid: Option<Grid>, fwhm: f64) -> DimTestConfig {
    let null = match (kind, grid) {
        (NullKind::Grf, Some(g)) => NullSpec::Grf { height: g.height, width: g.width, fwhm },
        _ => NullSpec::Iid,
    };
    DimTestConfig { b, alpha, seed, null }
}
