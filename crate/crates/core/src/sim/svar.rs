use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Variance split between the group, individual and noise subspaces, plus the
/// split of the group share across group components.
#[derive(Debug, Clone, PartialEq)]
pub struct SvarSpec {
    pub group_share: f64,
    pub individual_share: f64,
    pub noise_share: f64,
    pub within_group_split: Vec<f64>,
}

/// Named SVAR settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SvarPreset {
    High,
    Medium,
    Low,
}

impl SvarPreset {
    pub const ALL: [SvarPreset; 3] = [SvarPreset::High, SvarPreset::Medium, SvarPreset::Low];

    pub fn name(self) -> &'static str {
        match self {
            SvarPreset::High => "high",
            SvarPreset::Medium => "medium",
            SvarPreset::Low => "low",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        SvarPreset::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Group : individual : noise shares. Medium is half way between high and
    /// low in the group share, stored at the printed precision.
    pub fn shares(self) -> (f64, f64, f64) {
        match self {
            SvarPreset::High => (0.335, 0.299, 0.366),
            SvarPreset::Medium => (0.176, 0.386, 0.438),
            SvarPreset::Low => (0.017, 0.46, 0.523),
        }
    }

    pub fn spec(self) -> SvarSpec {
        let (g, i, n) = self.shares();
        SvarSpec {
            group_share: g,
            individual_share: i,
            noise_share: n,
            within_group_split: DEFAULT_GROUP_SPLIT.to_vec(),
        }
    }
}

/// Low, medium and high group-component weights.
pub const DEFAULT_GROUP_SPLIT: [f64; 3] = [0.154, 0.298, 0.548];

impl SvarSpec {
    pub fn validate(&self) -> Result<()> {
        let shares = [self.group_share, self.individual_share, self.noise_share];
        if shares.iter().any(|s| !(*s >= 0.0)) {
            return Err(invalid!("SVAR shares must be non-negative"));
        }
        if (shares.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(invalid!("SVAR shares must sum to 1, got {shares:?}"));
        }
        if self.within_group_split.iter().any(|s| !(*s >= 0.0))
            || (self.within_group_split.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(invalid!("within-group split must be non-negative and sum to 1"));
        }
        Ok(())
    }
}

/// Target column sums of squares for every mixing column of one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTargets {
    pub group: Vec<f64>,
    pub individual: Vec<f64>,
    pub noise: Vec<f64>,
}

impl VarianceTargets {
    pub fn total(&self) -> f64 {
        self.group.iter().chain(&self.individual).chain(&self.noise).sum()
    }
}

/// Splits `total_variance` across components: group components by the
/// within-group split, individual and noise components equally.
pub fn allocate_variance(
    svar: &SvarSpec,
    q_individual: usize,
    n_noise: usize,
    total_variance: f64,
) -> Result<VarianceTargets> {
    svar.validate()?;
    let group = svar
        .within_group_split
        .iter()
        .map(|w| total_variance * svar.group_share * w)
        .collect();
    let share = |s: f64, n: usize| if n == 0 { Vec::new() } else { vec![total_variance * s / n as f64; n] };
    Ok(VarianceTargets {
        group,
        individual: share(svar.individual_share, q_individual),
        noise: share(svar.noise_share, n_noise),
    })
}
