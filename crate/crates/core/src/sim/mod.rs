//! Synthetic multi-subject data following the group model
//! `X_i = M_i^g·S_g + M_i^I·S_{I,i} + M_i^n·N_i`.
//!
//! Group signals are digit-shaped templates shared by every subject,
//! individual signals are gamma random fields, noise rows are Gaussian random
//! fields, and every mixing column is an AR(1) time course scaled to its
//! variance target. A subject's full mixing is redrawn until its condition
//! number is at most [`MAX_MIXING_CONDITION`].

mod mixing;
mod svar;
mod templates;

pub use mixing::{simulate_mixing_ar1, MixingSpec};
pub use svar::{allocate_variance, SvarPreset, SvarSpec, VarianceTargets, DEFAULT_GROUP_SPLIT};
pub use templates::{make_group_templates, make_group_templates_raw, template_mask, DIGIT_MASKS};

use alloc::vec::Vec;

use crate::error::{degenerate, invalid, Result};
use crate::fields::{gamma_field, gaussian_smooth_field, FieldSpec};
use crate::linalg::{singular_values, DataMatrix, Matrix};
use crate::par::par_map;
use crate::rng::derive_seed;

/// Mixing draws whose condition number exceeds this are redrawn.
pub const MAX_MIXING_CONDITION: f64 = 1e4;
const MAX_MIXING_DRAWS: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub n_subjects: usize,
    /// Group components planted in the data.
    pub q_g: usize,
    pub q_individual: usize,
    pub n_gaussian: usize,
    pub svar: SvarSpec,
    pub mixing: MixingSpec,
    pub height: usize,
    pub width: usize,
    pub fwhm: f64,
    pub gamma_shape: f64,
    pub gamma_rate: f64,
    pub seed: u64,
}

impl SimScenario {
    /// Twenty 50×1089 subjects: 3 group, 22 individual and 25 Gaussian
    /// components on a 33×33 grid, FWHM 9, gamma(0.02, 1e-4) individual
    /// marginals, AR(1) mixing with φ = 0.37.
    pub fn standard(preset: SvarPreset, seed: u64) -> Self {
        SimScenario {
            n_subjects: 20,
            q_g: 3,
            q_individual: 22,
            n_gaussian: 25,
            svar: preset.spec(),
            mixing: MixingSpec { ar_coefficient: 0.37, t: 50 },
            height: 33,
            width: 33,
            fwhm: 9.0,
            gamma_shape: 0.02,
            gamma_rate: 1e-4,
            seed,
        }
    }

    pub fn t(&self) -> usize {
        self.q_g + self.q_individual + self.n_gaussian
    }

    /// Non-Gaussian dimension per subject.
    pub fn q_subject(&self) -> usize {
        self.q_g + self.q_individual
    }

    pub fn v(&self) -> usize {
        self.height * self.width
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(invalid!("scenario needs at least one subject"));
        }
        if self.q_g != DIGIT_MASKS.len() {
            return Err(invalid!("the generator plants exactly {} group templates, got q_g = {}", DIGIT_MASKS.len(), self.q_g));
        }
        if self.svar.within_group_split.len() != self.q_g {
            return Err(invalid!("within-group split has {} weights for {} group components", self.svar.within_group_split.len(), self.q_g));
        }
        if self.mixing.t != self.t() {
            return Err(invalid!("mixing length {} differs from T = {}", self.mixing.t, self.t()));
        }
        self.svar.validate()?;
        self.mixing.validate()?;
        FieldSpec::gamma(self.height, self.width, self.fwhm, self.gamma_shape, self.gamma_rate).validate()
    }

    /// Per-component variance targets, total variance normalized to `T`.
    pub fn allocate_svar(&self) -> Result<VarianceTargets> {
        allocate_variance(&self.svar, self.q_individual, self.n_gaussian, self.t() as f64)
    }
}

/// Ground-truth mixing blocks of one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectMixing {
    /// T×q_g
    pub group: Matrix,
    /// T×q_I
    pub individual: Matrix,
    /// T×(T − q_i)
    pub noise: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    pub subjects: Vec<DataMatrix>,
    pub truth_group: Matrix,
    pub truth_individual: Vec<Matrix>,
    pub truth_noise: Vec<Matrix>,
    pub truth_mixing: Vec<SubjectMixing>,
    pub targets: VarianceTargets,
}

impl SimulatedDataset {
    /// `X_i` rebuilt from the stored truth blocks.
    pub fn reconstruct(&self, i: usize) -> Result<Matrix> {
        let m = &self.truth_mixing[i];
        let g = m.group.matmul(&self.truth_group)?;
        let ind = m.individual.matmul(&self.truth_individual[i])?;
        let n = m.noise.matmul(&self.truth_noise[i])?;
        g.add(&ind)?.add(&n)
    }
}

/// Seed tags: 0 templates, 1 individual fields, 2 noise fields, 3 mixing
/// columns (with a trailing attempt number after a rejected draw).
pub fn generate_dataset(scenario: &SimScenario) -> Result<SimulatedDataset> {
    scenario.validate()?;
    let seed = scenario.seed;
    let truth_group = make_group_templates(scenario.height, scenario.width, derive_seed(seed, &[0]))?;
    let targets = scenario.allocate_svar()?;
    let per_subject = par_map(scenario.n_subjects, |i| generate_subject(scenario, &truth_group, &targets, i));
    let mut out = SimulatedDataset {
        subjects: Vec::with_capacity(scenario.n_subjects),
        truth_group,
        truth_individual: Vec::new(),
        truth_noise: Vec::new(),
        truth_mixing: Vec::new(),
        targets,
    };
    for s in per_subject {
        let (x, ind, noise, mixing) = s?;
        out.subjects.push(DataMatrix::new(x));
        out.truth_individual.push(ind);
        out.truth_noise.push(noise);
        out.truth_mixing.push(mixing);
    }
    Ok(out)
}

fn generate_subject(
    sc: &SimScenario,
    group: &Matrix,
    targets: &VarianceTargets,
    i: usize,
) -> Result<(Matrix, Matrix, Matrix, SubjectMixing)> {
    let s = sc.seed;
    let i = i as u64;
    let gamma_spec = FieldSpec::gamma(sc.height, sc.width, sc.fwhm, sc.gamma_shape, sc.gamma_rate);
    let gauss_spec = FieldSpec::gaussian(sc.height, sc.width, sc.fwhm);
    let individual = (0..sc.q_individual)
        .map(|j| gamma_field(&gamma_spec, derive_seed(s, &[1, i, j as u64])))
        .collect::<Result<Vec<_>>>()?;
    let noise = (0..sc.n_gaussian)
        .map(|j| gaussian_smooth_field(&gauss_spec, derive_seed(s, &[2, i, j as u64])))
        .collect::<Result<Vec<_>>>()?;
    let individual = Matrix::from_rows(&individual)?;
    let noise = Matrix::from_rows(&noise)?;

    let t = sc.t();
    let mut attempt = 0u64;
    let mixing = loop {
        let mut columns = Vec::with_capacity(t);
        let all_targets = targets.group.iter().chain(&targets.individual).chain(&targets.noise);
        for (c, &target) in all_targets.enumerate() {
            let tags = [3, i, c as u64, attempt];
            let tags = if attempt == 0 { &tags[..3] } else { &tags[..] };
            columns.push(simulate_mixing_ar1(&sc.mixing, target, derive_seed(s, tags))?);
        }
        let full = Matrix::from_fn(t, t, |r, c| columns[c][r]);
        let sv = singular_values(&full);
        if sv[0] <= MAX_MIXING_CONDITION * sv[t - 1] {
            break full;
        }
        attempt += 1;
        if attempt == MAX_MIXING_DRAWS {
            return Err(degenerate!("subject {i}: no mixing draw with condition number below {MAX_MIXING_CONDITION:e}"));
        }
    };
    let block = |from: usize, n: usize| Matrix::from_fn(t, n, |r, c| mixing[(r, from + c)]);
    let mixing = SubjectMixing {
        group: block(0, sc.q_g),
        individual: block(sc.q_g, sc.q_individual),
        noise: block(sc.q_g + sc.q_individual, sc.n_gaussian),
    };
    let x = mixing
        .group
        .matmul(group)?
        .add(&mixing.individual.matmul(&individual)?)?
        .add(&mixing.noise.matmul(&noise)?)?;
    Ok((x, individual, noise, mixing))
}
