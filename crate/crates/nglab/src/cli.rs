//! Command-line driver.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nglab_core::dimtest::{estimate_ng_dimension_with, DimTestReport, NullSpec};
use nglab_core::linalg::Matrix;
use nglab_core::pipeline::{component_variances, fit_group_lngca, GroupOptions, SubjectData};
use nglab_core::sim::{generate_dataset, SimulatedDataset};
use serde::Serialize;

use crate::config::{dim_config, DimSetting, Grid, NullKind, QgList, Settings, StudyConfig};
use crate::error::{Error, Result};
use crate::io::{create_dir, load_matrix, save_ngl1, write_text};
use crate::nulls::NullCache;
use crate::report::to_json;
use crate::study::{null_seed, run_study_with};

pub const THREADS_ENV: &str = "NGLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nglab", version, about = "Group linear non-Gaussian component analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one synthetic multi-subject dataset with its ground truth.
    Simulate(SimulateArgs),
    /// Repeat simulate → decompose → match and write an experiment report.
    RunStudy(StudyArgs),
    /// Group LNGCA on subject matrix files (NGL1 or CSV).
    Decompose(DecomposeArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads; defaults to $NGLAB_THREADS, then the core count.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = ["high", "medium", "low"])]
    pub preset: Option<String>,
    #[arg(long, value_name = "N")]
    pub subjects: Option<usize>,
    #[arg(long, value_name = "F")]
    pub fwhm: Option<f64>,
    #[arg(long, value_name = "HxW")]
    pub grid: Option<Grid>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = ["high", "medium", "low"])]
    pub preset: Option<String>,
    #[arg(long, value_name = "N")]
    pub reps: Option<usize>,
    #[arg(long, value_name = "N")]
    pub subjects: Option<usize>,
    /// One value or a comma-separated sweep such as 2,3,4.
    #[arg(long, value_name = "N[,N...]")]
    pub qg: Option<QgList>,
    /// Per-subject NG dimension, or `auto` for the grf-null test.
    #[arg(long, value_name = "N|auto")]
    pub dim: Option<DimSetting>,
    #[arg(long = "B", value_name = "N")]
    pub b: Option<usize>,
    #[arg(long, value_name = "F")]
    pub alpha: Option<f64>,
    /// Subject-level random restarts.
    #[arg(long, value_name = "N")]
    pub restarts: Option<usize>,
    #[arg(long, value_name = "N")]
    pub group_restarts: Option<usize>,
    #[arg(long, value_name = "F")]
    pub fwhm: Option<f64>,
    #[arg(long, value_name = "HxW")]
    pub grid: Option<Grid>,
    /// Also record k̂ per subject under these nulls.
    #[arg(long, value_name = "grf,iid", value_delimiter = ',')]
    pub dim_nulls: Option<Vec<NullKind>>,
    /// Run the individual-component step too.
    #[arg(long)]
    pub individual: bool,
    /// Record wall-clock runtimes (makes reports non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Subject matrices, T×V each, equal V.
    #[arg(value_name = "FILE")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_name = "N")]
    pub qg: Option<usize>,
    #[arg(long, value_name = "N|auto")]
    pub dim: Option<DimSetting>,
    #[arg(long = "B", value_name = "N")]
    pub b: Option<usize>,
    #[arg(long, value_name = "F")]
    pub alpha: Option<f64>,
    #[arg(long, value_name = "N")]
    pub restarts: Option<usize>,
    #[arg(long, value_name = "N")]
    pub group_restarts: Option<usize>,
    #[arg(long, value_name = "F")]
    pub fwhm: Option<f64>,
    #[arg(long, value_name = "HxW")]
    pub grid: Option<Grid>,
    /// Skip the individual-component step.
    #[arg(long)]
    pub no_individual: bool,
}

fn layered(common: &Common, flags: Settings) -> Result<Settings> {
    let file = match &common.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    Ok(file.overlay(Settings { seed: common.seed, ..flags }))
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(s.trim().parse().map_err(|_| Error::Usage(format!("{THREADS_ENV}='{s}' is not a count")))?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(Error::Usage("thread count must be at least 1".into()));
    }
    Ok(n)
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(threads)? {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Error::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(f)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => in_pool(a.common.threads, || simulate(&a)),
        Command::RunStudy(a) => in_pool(a.common.threads, || run_study_cmd(&a)),
        Command::Decompose(a) => in_pool(a.common.threads, || decompose(&a)),
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Serialize)]
struct SvarRealized {
    group: f64,
    individual: f64,
    noise: f64,
}

#[derive(Serialize)]
struct TruthTargets<'a> {
    group: &'a [f64],
    individual: &'a [f64],
    noise: &'a [f64],
}

#[derive(Serialize)]
struct ScenarioFile<'a> {
    config: &'a StudyConfig,
    dataset_seed: u64,
    t: usize,
    v: usize,
    q_g: usize,
    q_individual: usize,
    n_gaussian: usize,
    targets: TruthTargets<'a>,
    realized_svar: SvarRealized,
}

/// Mean over subjects of each block's share of the total mixing sum of squares.
fn realized_svar(data: &SimulatedDataset) -> SvarRealized {
    let n = data.truth_mixing.len() as f64;
    let mut acc = [0.0; 3];
    for m in &data.truth_mixing {
        let ss = |x: &Matrix| x.as_slice().iter().map(|e| e * e).sum::<f64>();
        let parts = [ss(&m.group), ss(&m.individual), ss(&m.noise)];
        let total: f64 = parts.iter().sum();
        for (a, p) in acc.iter_mut().zip(parts) {
            *a += p / total / n;
        }
    }
    SvarRealized { group: acc[0], individual: acc[1], noise: acc[2] }
}

fn subject_file(i: usize) -> String {
    format!("subject_{i:03}")
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let flags = Settings { preset: a.preset.clone(), subjects: a.subjects, fwhm: a.fwhm, grid: a.grid, ..Settings::default() };
    let cfg = StudyConfig::resolve(layered(&a.common, flags)?)?;
    let sc = cfg.scenario(cfg.seed);
    let data = generate_dataset(&sc)?;
    let out = &a.common.out;
    let truth = out.join("truth");
    create_dir(&truth)?;
    for (i, x) in data.subjects.iter().enumerate() {
        let name = subject_file(i);
        save_ngl1(&out.join(format!("{name}.ngl")), x.values())?;
        let m = &data.truth_mixing[i];
        save_ngl1(&truth.join(format!("{name}_individual.ngl")), &data.truth_individual[i])?;
        save_ngl1(&truth.join(format!("{name}_noise.ngl")), &data.truth_noise[i])?;
        save_ngl1(&truth.join(format!("{name}_mixing_group.ngl")), &m.group)?;
        save_ngl1(&truth.join(format!("{name}_mixing_individual.ngl")), &m.individual)?;
        save_ngl1(&truth.join(format!("{name}_mixing_noise.ngl")), &m.noise)?;
    }
    save_ngl1(&truth.join("group.ngl"), &data.truth_group)?;
    let realized = realized_svar(&data);
    println!(
        "realized SVAR shares: group {:.4}, individual {:.4}, noise {:.4}",
        realized.group, realized.individual, realized.noise
    );
    let file = ScenarioFile {
        config: &cfg,
        dataset_seed: sc.seed,
        t: sc.t(),
        v: sc.v(),
        q_g: sc.q_g,
        q_individual: sc.q_individual,
        n_gaussian: sc.n_gaussian,
        targets: TruthTargets {
            group: &data.targets.group,
            individual: &data.targets.individual,
            noise: &data.targets.noise,
        },
        realized_svar: realized,
    };
    write_text(&truth.join("scenario.json"), &to_json(&file)?)?;
    println!("wrote {} subjects to {}", data.subjects.len(), out.display());
    Ok(())
}

fn run_study_cmd(a: &StudyArgs) -> Result<()> {
    let flags = Settings {
        preset: a.preset.clone(),
        reps: a.reps,
        subjects: a.subjects,
        qg: a.qg.clone(),
        dim: a.dim,
        b: a.b,
        alpha: a.alpha,
        restarts: a.restarts,
        group_restarts: a.group_restarts,
        fwhm: a.fwhm,
        grid: a.grid,
        dim_nulls: a.dim_nulls.clone(),
        individual: a.individual.then_some(true),
        timings: a.timings.then_some(true),
        ..Settings::default()
    };
    let cfg = StudyConfig::resolve(layered(&a.common, flags)?)?;
    let cache = NullCache::new();
    let report = run_study_with(&cfg, &cache, |r| match &r.error {
        None => eprintln!("replication {} done", r.index),
        Some(e) => eprintln!("replication {} failed: {e}", r.index),
    })?;
    report.write_dir(&a.common.out)?;
    for r in &report.aggregates.recovery {
        let means: Vec<String> = r.components.iter().map(|c| format!("{:.3}", c.mean)).collect();
        println!("{} q_g={}: mean |corr| per component [{}]", r.method, r.q_g, means.join(", "));
    }
    for d in &report.aggregates.dimension {
        println!("{} null: mode {}, median {}", d.method, d.mode, d.median);
    }
    println!(
        "{} of {} replications succeeded; report in {}",
        report.aggregates.n_ok,
        cfg.reps,
        a.common.out.display()
    );
    Ok(())
}

/// Resolved settings of `decompose`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposeConfig {
    pub seed: u64,
    pub qg: usize,
    pub dim: DimSetting,
    #[serde(rename = "B")]
    pub b: usize,
    pub alpha: f64,
    pub restarts: usize,
    pub group_restarts: usize,
    pub fwhm: Option<f64>,
    pub grid: Option<Grid>,
    pub individual: bool,
}

impl DecomposeConfig {
    pub fn resolve(s: Settings, no_individual: bool) -> Result<Self> {
        let qg = match s.qg.map(|q| q.0) {
            Some(v) if v.len() == 1 => v[0],
            Some(_) => return Err(Error::Usage("decompose takes a single --qg value".into())),
            None => return Err(Error::Usage("--qg is required".into())),
        };
        let dim = s.dim.ok_or_else(|| Error::Usage("--dim is required (a count or 'auto')".into()))?;
        let c = DecomposeConfig {
            seed: s.seed.unwrap_or(0),
            qg,
            dim,
            b: s.b.unwrap_or(200),
            alpha: s.alpha.unwrap_or(0.05),
            restarts: s.restarts.unwrap_or(30),
            group_restarts: s.group_restarts.unwrap_or(100),
            fwhm: s.fwhm,
            grid: s.grid,
            individual: !no_individual && s.individual.unwrap_or(true),
        };
        if c.qg == 0 {
            return Err(Error::Usage("--qg must be at least 1".into()));
        }
        if let DimSetting::Fixed(n) = c.dim {
            if n < c.qg {
                return Err(Error::Usage(format!("--dim {n} is below --qg {}", c.qg)));
            }
        }
        if c.dim == DimSetting::Auto && (c.grid.is_none() || c.fwhm.is_none()) {
            return Err(Error::Usage("--dim auto needs --grid HxW and --fwhm for the grf null".into()));
        }
        if c.b == 0 || !(c.alpha > 0.0 && c.alpha < 1.0) {
            return Err(Error::Usage("--B must be positive and --alpha in (0, 1)".into()));
        }
        if c.restarts == 0 || c.group_restarts == 0 {
            return Err(Error::Usage("restart counts must be at least 1".into()));
        }
        Ok(c)
    }
}

#[derive(Serialize)]
struct StepOut {
    k: usize,
    p_value: f64,
    statistic: f64,
}

#[derive(Serialize)]
struct DimOut {
    subject: usize,
    file: String,
    k_hat: usize,
    q_used: usize,
    #[serde(rename = "B")]
    b: usize,
    alpha: f64,
    null: String,
    seed: u64,
    path: Vec<StepOut>,
}

fn dim_out(subject: usize, file: &Path, r: &DimTestReport, q_used: usize) -> DimOut {
    let null = match r.config.null {
        NullSpec::Iid => "iid".to_string(),
        NullSpec::Grf { height, width, fwhm } => format!("grf {height}x{width} fwhm {fwhm}"),
    };
    DimOut {
        subject,
        file: file.display().to_string(),
        k_hat: r.k_hat,
        q_used,
        b: r.config.b,
        alpha: r.config.alpha,
        null,
        seed: r.config.seed,
        path: r.path.iter().map(|s| StepOut { k: s.k, p_value: s.p_value, statistic: s.statistic }).collect(),
    }
}

fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn decompose(a: &DecomposeArgs) -> Result<()> {
    if a.inputs.len() < 2 {
        return Err(Error::Usage(format!("decompose needs at least 2 subject files, got {}", a.inputs.len())));
    }
    let flags = Settings {
        qg: a.qg.map(|q| QgList(vec![q])),
        dim: a.dim,
        b: a.b,
        alpha: a.alpha,
        restarts: a.restarts,
        group_restarts: a.group_restarts,
        fwhm: a.fwhm,
        grid: a.grid,
        ..Settings::default()
    };
    let cfg = DecomposeConfig::resolve(layered(&a.common, flags)?, a.no_individual)?;
    let raw = a.inputs.iter().map(|p| load_matrix(p)).collect::<Result<Vec<_>>>()?;
    let v = raw[0].ncols();
    for (p, m) in a.inputs.iter().zip(&raw).skip(1) {
        if m.ncols() != v {
            return Err(Error::format(
                p,
                format!("has {} columns but {} has {v}", m.ncols(), a.inputs[0].display()),
            ));
        }
    }
    if let Some(g) = cfg.grid {
        if g.n_pixels() != v {
            return Err(Error::Usage(format!("--grid {g} has {} pixels but the inputs have {v} columns", g.n_pixels())));
        }
    }
    let subjects = raw
        .iter()
        .zip(&a.inputs)
        .map(|(m, p)| SubjectData::from_raw(m).map_err(|e| Error::format(p, e.to_string())))
        .collect::<Result<Vec<_>>>()?;

    let out = &a.common.out;
    create_dir(out)?;
    let q_list: Vec<usize> = match cfg.dim {
        DimSetting::Fixed(n) => {
            for (p, s) in a.inputs.iter().zip(&subjects) {
                if n > s.whitened().n_rows() {
                    return Err(Error::format(p, format!("--dim {n} exceeds its {} rows", s.whitened().n_rows())));
                }
            }
            vec![n; subjects.len()]
        }
        DimSetting::Auto => {
            let dc = dim_config(NullKind::Grf, cfg.b, cfg.alpha, null_seed(cfg.seed), cfg.grid, cfg.fwhm.unwrap());
            let cache = NullCache::new();
            let reports = subjects
                .iter()
                .map(|s| estimate_ng_dimension_with(s.whitened(), &dc, &cache))
                .collect::<nglab_core::Result<Vec<_>>>()?;
            let q: Vec<usize> = reports.iter().map(|r| r.k_hat.max(cfg.qg)).collect();
            let dump: Vec<DimOut> =
                reports.iter().enumerate().map(|(i, r)| dim_out(i, &a.inputs[i], r, q[i])).collect();
            write_text(&out.join("dimension_tests.json"), &to_json(&dump)?)?;
            q
        }
    };

    let opts = GroupOptions {
        subject: nglab_core::ica::FastIcaOptions::default().with_restarts(cfg.restarts),
        group: nglab_core::ica::FastIcaOptions::default().with_restarts(cfg.group_restarts),
        individual: cfg.individual,
    }
    .with_seed(cfg.seed);
    let res = fit_group_lngca(&subjects, &q_list, cfg.qg, &opts)?;

    save_ngl1(&out.join("group_signals.ngl"), &res.s_g)?;
    let mut sv = String::from("index,singular_value\n");
    for (i, s) in res.singular_values.iter().enumerate() {
        sv.push_str(&format!("{i},{}\n", csv_float(*s)));
    }
    write_text(&out.join("singular_values.csv"), &sv)?;
    let mut gc = String::from("component,contrast\n");
    for (j, c) in res.group_contrasts.iter().enumerate() {
        gc.push_str(&format!("{j},{}\n", csv_float(*c)));
    }
    write_text(&out.join("group_contrasts.csv"), &gc)?;
    let mut comps = String::from("subject,kind,component,contrast\n");
    let mut vars = String::from("subject,component,variance\n");
    let variances = component_variances(&res);
    for (i, s) in res.subjects.iter().enumerate() {
        let name = subject_file(i);
        save_ngl1(&out.join(format!("{name}_mixing_group.ngl")), &s.m_g)?;
        if cfg.individual {
            save_ngl1(&out.join(format!("{name}_individual.ngl")), &s.s_i)?;
            save_ngl1(&out.join(format!("{name}_mixing_individual.ngl")), &s.m_i)?;
        }
        for (j, c) in s.contrasts.iter().enumerate() {
            comps.push_str(&format!("{i},subject,{j},{}\n", csv_float(*c)));
        }
        for (j, c) in s.individual_contrasts.iter().enumerate() {
            comps.push_str(&format!("{i},individual,{j},{}\n", csv_float(*c)));
        }
        for (j, v) in variances[i].iter().enumerate() {
            vars.push_str(&format!("{i},{j},{}\n", csv_float(*v)));
        }
    }
    write_text(&out.join("component_contrasts.csv"), &comps)?;
    write_text(&out.join("component_variances.csv"), &vars)?;
    let files: Vec<String> = a.inputs.iter().map(|p| p.display().to_string()).collect();
    #[derive(Serialize)]
    struct Summary<'a> {
        config: &'a DecomposeConfig,
        inputs: &'a [String],
        q_used: &'a [usize],
    }
    write_text(&out.join("decomposition.json"), &to_json(&Summary { config: &cfg, inputs: &files, q_used: &q_list })?)?;
    println!("{} group components from {} subjects written to {}", cfg.qg, subjects.len(), out.display());
    Ok(())
}
