//! Group LNGCA and the temporal-concatenation PCA+ICA baseline.
//!
//! Group LNGCA runs in four steps:
//! 1. per subject, extract the `q_i` most non-Gaussian components;
//! 2. normalize every component row, stack them across subjects and keep the
//!    top `q_g` right singular vectors of the stack;
//! 3. unmix those with noise-free ICA to get the group signals `S_g`;
//! 4. per subject, project `S_g` out of the subject's NG subspace and extract
//!    the remaining `q_i − q_g` individual components.

use alloc::vec::Vec;

use crate::error::{degenerate, invalid, Result};
use crate::ica::{fastica_extract, FastIcaOptions, UnmixingResult};
use crate::linalg::{
    center_rows, prepare, residual_project, sym_eigen, sym_orthonormalize, whiten_reduced, DataMatrix, Matrix,
    WhiteningRecord,
};
use crate::par::par_map;
use crate::rng::derive_seed;
use crate::stats;

/// Tolerance for the whiteness checks of intermediate signals.
const WHITE_TOL: f64 = 1e-6;

/// One subject's whitened data together with the map back to data units.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectData {
    whitened: DataMatrix,
    /// T×r; centered data ≈ `dewhitening · whitened`.
    dewhitening: Matrix,
}

impl SubjectData {
    /// Centers and whitens a raw T×V matrix.
    pub fn from_raw(x: &Matrix) -> Result<Self> {
        let (whitened, rec) = prepare(x)?;
        Ok(SubjectData { whitened, dewhitening: rec.dewhitening })
    }

    /// Wraps already whitened data; estimated mixing is then expressed in
    /// whitened units.
    pub fn from_whitened(x: DataMatrix) -> Result<Self> {
        if !x.is_whitened() {
            return Err(invalid!("subject data must be whitened"));
        }
        let dewhitening = Matrix::identity(x.n_rows());
        Ok(SubjectData { whitened: x, dewhitening })
    }

    pub fn from_parts(whitened: DataMatrix, record: &WhiteningRecord) -> Result<Self> {
        if !whitened.is_whitened() || record.dewhitening.ncols() != whitened.n_rows() {
            return Err(invalid!("whitening record does not match the data"));
        }
        Ok(SubjectData { whitened, dewhitening: record.dewhitening.clone() })
    }

    pub fn whitened(&self) -> &DataMatrix {
        &self.whitened
    }

    pub fn dewhitening(&self) -> &Matrix {
        &self.dewhitening
    }

    pub fn n_cols(&self) -> usize {
        self.whitened.n_cols()
    }

    /// Least-squares mixing of `s` (rows orthonormal under `(1/V)⟨·,·⟩`) in
    /// data units: `(1/V)·X_c·S'`, T×q.
    pub fn mixing_for(&self, s: &Matrix) -> Result<Matrix> {
        let v = self.n_cols() as f64;
        let coords = self.whitened.values().mul_transpose(s)?.scale(1.0 / v);
        self.dewhitening.matmul(&coords)
    }
}

/// Options shared by both pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupOptions {
    /// Subject-level extraction (Step 1 and Step 4).
    pub subject: FastIcaOptions,
    /// Group-level ICA (Step 3).
    pub group: FastIcaOptions,
    /// Run Step 4.
    pub individual: bool,
}

impl Default for GroupOptions {
    fn default() -> Self {
        GroupOptions {
            subject: FastIcaOptions::default(),
            group: FastIcaOptions::default().with_restarts(100),
            individual: true,
        }
    }
}

impl GroupOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.subject.seed = seed;
        self.group.seed = seed;
        self
    }
}

/// Step-1 output for one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectComponents {
    /// q_i×V, rows orthonormal under `(1/V)⟨·,·⟩`, sorted by contrast.
    pub s: Matrix,
    pub contrasts: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectResult {
    /// T×q_g group mixing in data units.
    pub m_g: Matrix,
    /// (q_i − q_g)×V individual components; empty when Step 4 is skipped.
    pub s_i: Matrix,
    /// T×(q_i − q_g).
    pub m_i: Matrix,
    /// Step-1 contrasts of the subject's NG components.
    pub contrasts: Vec<f64>,
    pub individual_contrasts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupResult {
    /// q_g×V with `(1/V)·S_g·S_g' = I`.
    pub s_g: Matrix,
    pub group_contrasts: Vec<f64>,
    /// Singular values of the stacked normalized subject components.
    pub singular_values: Vec<f64>,
    pub subjects: Vec<SubjectResult>,
}

impl GroupResult {
    pub fn q_g(&self) -> usize {
        self.s_g.nrows()
    }
}

fn check_subjects(subjects: &[SubjectData]) -> Result<usize> {
    let v = subjects.first().ok_or_else(|| invalid!("at least one subject is required"))?.n_cols();
    for (i, s) in subjects.iter().enumerate() {
        if s.n_cols() != v {
            return Err(invalid!("subject {i} has {} columns, subject 0 has {v}", s.n_cols()));
        }
    }
    Ok(v)
}

/// Step 1: per-subject extraction. Subject `i` uses seed `(seed, 0, i)`.
pub fn extract_subject_components(
    subjects: &[SubjectData],
    q_list: &[usize],
    opts: &FastIcaOptions,
) -> Result<Vec<SubjectComponents>> {
    check_subjects(subjects)?;
    if q_list.len() != subjects.len() {
        return Err(invalid!("{} dimensions given for {} subjects", q_list.len(), subjects.len()));
    }
    par_map(subjects.len(), |i| {
        let o = opts.clone().with_seed(derive_seed(opts.seed, &[0, i as u64]));
        let r = fastica_extract(subjects[i].whitened(), q_list[i], &o)?;
        Ok(SubjectComponents { converged: r.any_converged(), s: r.s, contrasts: r.contrasts })
    })
    .into_iter()
    .collect()
}

/// Full group LNGCA on whitened subjects.
pub fn fit_group_lngca(
    subjects: &[SubjectData],
    q_list: &[usize],
    q_g: usize,
    opts: &GroupOptions,
) -> Result<GroupResult> {
    check_q_g(q_list, q_g)?;
    let comps = extract_subject_components(subjects, q_list, &opts.subject)?;
    fit_group_from_components(subjects, &comps, q_g, opts)
}

fn check_q_g(q_list: &[usize], q_g: usize) -> Result<()> {
    let min_q = q_list.iter().copied().min().unwrap_or(0);
    if q_g == 0 || q_g > min_q {
        return Err(invalid!("q_g = {q_g} must lie in 1..={min_q} (smallest subject dimension)"));
    }
    Ok(())
}

/// Steps 2-4 from precomputed Step-1 components.
pub fn fit_group_from_components(
    subjects: &[SubjectData],
    comps: &[SubjectComponents],
    q_g: usize,
    opts: &GroupOptions,
) -> Result<GroupResult> {
    let v = check_subjects(subjects)?;
    if comps.len() != subjects.len() {
        return Err(invalid!("{} component sets for {} subjects", comps.len(), subjects.len()));
    }
    let q_list: Vec<usize> = comps.iter().map(|c| c.s.nrows()).collect();
    check_q_g(&q_list, q_g)?;
    for (i, c) in comps.iter().enumerate() {
        if c.s.ncols() != v {
            return Err(invalid!("components of subject {i} have {} columns, expected {v}", c.s.ncols()));
        }
    }

    // Step 2
    let blocks: Vec<&Matrix> = comps.iter().map(|c| &c.s).collect();
    let stacked = normalize_rows(&Matrix::vstack(&blocks)?)?;
    let (singular_values, y_g) = top_right_singular(&stacked, q_g)?;

    // Step 3
    let y_g = DataMatrix::assume_whitened(y_g.scale(libm::sqrt(v as f64)), WHITE_TOL)?;
    let group_opts = opts.group.clone().with_seed(derive_seed(opts.group.seed, &[1]));
    let mut g = fastica_extract(&y_g, q_g, &group_opts)?;
    orient_positive_skew(&mut g.s);
    let s_g = g.s;

    // Step 4
    let subject_results = par_map(subjects.len(), |i| {
        subject_step(&subjects[i], &comps[i], &s_g, opts, i)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    Ok(GroupResult { s_g, group_contrasts: g.contrasts, singular_values, subjects: subject_results })
}

fn subject_step(
    subject: &SubjectData,
    comps: &SubjectComponents,
    s_g: &Matrix,
    opts: &GroupOptions,
    i: usize,
) -> Result<SubjectResult> {
    let m_g = subject.mixing_for(s_g)?;
    let t = subject.dewhitening().nrows();
    let n_ind = comps.s.nrows() - s_g.nrows();
    let empty = SubjectResult {
        m_g,
        s_i: Matrix::zeros(0, s_g.ncols()),
        m_i: Matrix::zeros(t, 0),
        contrasts: comps.contrasts.clone(),
        individual_contrasts: Vec::new(),
    };
    if !opts.individual || n_ind == 0 {
        return Ok(empty);
    }
    // span of M_i S_i (I − P_g) equals the row span of S_i (I − P_g)
    let resid = residual_project(s_g, &comps.s)?;
    let resid = center_rows(&DataMatrix::new(resid))?;
    let (white, _) = whiten_reduced(&resid, n_ind)?;
    let o = opts.subject.clone().with_seed(derive_seed(opts.subject.seed, &[2, i as u64]));
    let mut r: UnmixingResult = fastica_extract(&white, n_ind, &o)?;
    orient_positive_skew(&mut r.s);
    let m_i = subject.mixing_for(&r.s)?;
    Ok(SubjectResult { s_i: r.s, m_i, individual_contrasts: r.contrasts, ..empty })
}

/// Scales every row to unit Euclidean norm.
pub fn normalize_rows(x: &Matrix) -> Result<Matrix> {
    let mut out = x.clone();
    for i in 0..out.nrows() {
        let row = out.row_mut(i);
        let n = libm::sqrt(row.iter().map(|e| e * e).sum::<f64>());
        if !(n > 0.0) {
            return Err(degenerate!("row {i} has zero norm"));
        }
        row.iter_mut().for_each(|e| *e /= n);
    }
    Ok(out)
}

/// All singular values of `z` (n×V, one per row) and its top `k` right
/// singular vectors as unit-norm rows, via the n×n Gram matrix.
pub fn top_right_singular(z: &Matrix, k: usize) -> Result<(Vec<f64>, Matrix)> {
    let n = z.nrows();
    if k == 0 || k > n.min(z.ncols()) {
        return Err(invalid!("cannot keep {k} singular vectors of a {}x{} matrix", n, z.ncols()));
    }
    let eig = sym_eigen(&z.gram())?;
    let sv: Vec<f64> = eig.values.iter().map(|&l| libm::sqrt(l.max(0.0))).collect();
    let floor = 1e-10 * sv[0];
    if !(sv[k - 1] > floor) {
        return Err(degenerate!("stacked components have rank below {k}"));
    }
    let u = Matrix::from_fn(k, n, |i, j| eig.vectors[(j, i)] / sv[i]);
    let mut y = u.matmul(z)?;
    // re-orthonormalize against round-off in the Gram route
    y = sym_orthonormalize(&y)?;
    Ok((sv, y))
}

/// Flips rows so each has nonnegative skewness.
pub fn orient_positive_skew(s: &mut Matrix) {
    for i in 0..s.nrows() {
        if stats::skewness(s.row(i)) < 0.0 {
            s.row_mut(i).iter_mut().for_each(|e| *e = -*e);
        }
    }
}

/// How many principal components each subject keeps in the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubjectReduction {
    Count(usize),
    /// Smallest count whose eigenvalues capture at least this fraction.
    VarianceFraction(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub s_g: Matrix,
    pub group_contrasts: Vec<f64>,
    /// Singular values of the concatenated subject PC scores.
    pub singular_values: Vec<f64>,
    /// Retained PCs per subject.
    pub retained: Vec<usize>,
    /// T×q_g per subject, data units.
    pub m_g: Vec<Matrix>,
}

/// Temporal-concatenation group PCA followed by ICA.
///
/// Each subject keeps its leading principal components as whitened scores;
/// the scores are concatenated and the group PCA keeps `q_g` directions.
pub fn fit_group_ica_baseline(
    subjects: &[SubjectData],
    reduction: SubjectReduction,
    q_g: usize,
    ica: &FastIcaOptions,
) -> Result<BaselineResult> {
    let v = check_subjects(subjects)?;
    let mut retained = Vec::with_capacity(subjects.len());
    let mut scores = Vec::with_capacity(subjects.len());
    for (i, s) in subjects.iter().enumerate() {
        let t = s.dewhitening().nrows();
        // centered data = dewhitening · whitened
        let x_c = s.dewhitening().matmul(s.whitened().values())?;
        let eig = sym_eigen(&x_c.gram().scale(1.0 / v as f64))?;
        let k = match reduction {
            SubjectReduction::Count(k) => {
                if k == 0 || k > t {
                    return Err(invalid!("subject {i}: cannot keep {k} of {t} components"));
                }
                k
            }
            SubjectReduction::VarianceFraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(invalid!("variance fraction must lie in (0, 1], got {f}"));
                }
                let total: f64 = eig.values.iter().map(|l| l.max(0.0)).sum();
                let mut acc = 0.0;
                let mut k = t;
                for (j, l) in eig.values.iter().enumerate() {
                    acc += l.max(0.0);
                    if acc >= f * total * (1.0 - 1e-12) {
                        k = j + 1;
                        break;
                    }
                }
                k
            }
        };
        if !(eig.values[k - 1] > 0.0) {
            return Err(degenerate!("subject {i}: retained component {k} has zero variance"));
        }
        // whitened scores Λ_k^{-1/2} U_k' X_c
        let u_k = Matrix::from_fn(k, t, |r, c| eig.vectors[(c, r)] / libm::sqrt(eig.values[r]));
        scores.push(u_k.matmul(&x_c)?);
        retained.push(k);
    }
    let total: usize = retained.iter().sum();
    if q_g == 0 || q_g > total {
        return Err(invalid!("q_g = {q_g} exceeds the {total} concatenated components"));
    }
    let blocks: Vec<&Matrix> = scores.iter().collect();
    let (singular_values, y_g) = top_right_singular(&Matrix::vstack(&blocks)?, q_g)?;
    let y_g = DataMatrix::assume_whitened(y_g.scale(libm::sqrt(v as f64)), WHITE_TOL)?;
    let o = ica.clone().with_seed(derive_seed(ica.seed, &[1]));
    let mut g = fastica_extract(&y_g, q_g, &o)?;
    orient_positive_skew(&mut g.s);
    let m_g = subjects.iter().map(|s| s.mixing_for(&g.s)).collect::<Result<Vec<_>>>()?;
    Ok(BaselineResult { s_g: g.s, group_contrasts: g.contrasts, singular_values, retained, m_g })
}

/// Column sums of squares of each subject's group mixing: the variance each
/// subject devotes to each group component.
pub fn component_variances(result: &GroupResult) -> Vec<Vec<f64>> {
    result.subjects.iter().map(|s| s.m_g.column_sums_of_squares()).collect()
}
