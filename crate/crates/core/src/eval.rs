//! Matching estimated components to ground truth, and group-difference tests
//! on component variances.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::special::student_t_two_sided;
use crate::stats;

/// Cost given to padding cells of a rectangular assignment; exceeds any
/// `1 − |corr|`.
pub const PAD_COST: f64 = 2.0;

/// Minimum-cost assignment of rows to columns (Hungarian method with
/// potentials, O(n³)). Rectangular input is padded to square with
/// [`PAD_COST`]. Returns, for every row, its column or `None`.
pub fn assign_min_cost(cost: &Matrix) -> Result<Vec<Option<usize>>> {
    let (r, c) = cost.shape();
    if cost.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(invalid!("assignment costs must be finite"));
    }
    let n = r.max(c);
    if n == 0 {
        return Ok(Vec::new());
    }
    let a = |i: usize, j: usize| if i < r && j < c { cost[(i, j)] } else { PAD_COST };
    // 1-based arrays; p[j] is the row assigned to column j
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; r];
    for j in 1..=n {
        let i = p[j] - 1;
        if i < r && j - 1 < c {
            out[i] = Some(j - 1);
        }
    }
    Ok(out)
}

/// Total cost of a row → column assignment, ignoring unassigned rows.
pub fn assignment_cost(cost: &Matrix, assignment: &[Option<usize>]) -> f64 {
    assignment.iter().enumerate().filter_map(|(i, j)| j.map(|j| cost[(i, j)])).sum()
}

/// Greedy assignment: repeatedly takes the cheapest remaining cell.
pub fn assign_greedy(cost: &Matrix) -> Vec<Option<usize>> {
    let (r, c) = cost.shape();
    let mut cells: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).collect();
    cells.sort_by(|&(a, b), &(x, y)| cost[(a, b)].total_cmp(&cost[(x, y)]).then((a, b).cmp(&(x, y))));
    let mut out = vec![None; r];
    let mut col_used = vec![false; c];
    for (i, j) in cells {
        if out[i].is_none() && !col_used[j] {
            out[i] = Some(j);
            col_used[j] = true;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// `assignment[i] = Some(j)` pairs estimated row `i` with true row `j`.
    pub assignment: Vec<Option<usize>>,
    /// ±1 aligning each estimated row with its match; +1 when unmatched.
    pub signs: Vec<f64>,
    /// `|corr|` of each true row with its estimate, `None` when unmatched.
    pub truth_correlations: Vec<Option<f64>>,
    /// Σ (1 − |corr|) over matched pairs.
    pub total_cost: f64,
}

impl MatchResult {
    /// Matched `|corr|` values ordered by true index.
    pub fn matched_correlations(&self) -> Vec<f64> {
        self.truth_correlations.iter().flatten().copied().collect()
    }

    pub fn min_correlation(&self) -> f64 {
        self.matched_correlations().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Correlation matrix between the rows of `a` and `b`.
pub fn cross_correlations(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.ncols() != b.ncols() {
        return Err(invalid!("cannot correlate rows of length {} and {}", a.ncols(), b.ncols()));
    }
    let mut out = Matrix::zeros(a.nrows(), b.nrows());
    for i in 0..a.nrows() {
        for j in 0..b.nrows() {
            out[(i, j)] = stats::correlation(a.row(i), b.row(j))?;
        }
    }
    Ok(out)
}

/// Pairs estimated and true components by minimizing Σ (1 − |corr|).
pub fn match_components(s_est: &Matrix, s_true: &Matrix) -> Result<MatchResult> {
    let corr = cross_correlations(s_est, s_true)?;
    let cost = Matrix::from_fn(corr.nrows(), corr.ncols(), |i, j| 1.0 - corr[(i, j)].abs());
    let assignment = assign_min_cost(&cost)?;
    let mut signs = vec![1.0; s_est.nrows()];
    let mut truth_correlations = vec![None; s_true.nrows()];
    for (i, j) in assignment.iter().enumerate() {
        if let Some(j) = *j {
            let c = corr[(i, j)];
            signs[i] = if c < 0.0 { -1.0 } else { 1.0 };
            truth_correlations[j] = Some(c.abs());
        }
    }
    let total_cost = assignment_cost(&cost, &assignment);
    Ok(MatchResult { assignment, signs, truth_correlations, total_cost })
}

/// Welch two-sample t-test on log variances; returns `(t, two-sided p)`.
pub fn log_variance_test(group_a: &[f64], group_b: &[f64]) -> Result<(f64, f64)> {
    for (name, g) in [("first", group_a), ("second", group_b)] {
        if g.len() < 2 {
            return Err(invalid!("the {name} group needs at least 2 values, got {}", g.len()));
        }
        if let Some(x) = g.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(invalid!("variances must be positive and finite, got {x}"));
        }
    }
    let la: Vec<f64> = group_a.iter().map(|&x| libm::log(x)).collect();
    let lb: Vec<f64> = group_b.iter().map(|&x| libm::log(x)).collect();
    welch_t_test(&la, &lb)
}

/// Welch unequal-variance t-test with Welch–Satterthwaite degrees of freedom.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < 2 || b.len() < 2 {
        return Err(invalid!("each group needs at least 2 values"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (stats::mean(a), stats::mean(b));
    // unbiased sample variances
    let va = stats::variance(a) * na / (na - 1.0);
    let vb = stats::variance(b) * nb / (nb - 1.0);
    let (ea, eb) = (va / na, vb / nb);
    let se2 = ea + eb;
    let diff = ma - mb;
    if !(se2 > 0.0) {
        return Ok(if diff == 0.0 { (0.0, 1.0) } else { (diff.signum() * f64::INFINITY, 0.0) });
    }
    let t = diff / libm::sqrt(se2);
    let df = se2 * se2 / (ea * ea / (na - 1.0) + eb * eb / (nb - 1.0));
    Ok((t, student_t_two_sided(t, df)))
}

/// Benjamini–Hochberg step-up adjusted p-values, in input order.
pub fn bh_adjust(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(invalid!("p-values must lie in [0, 1], got {p}"));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]).then(i.cmp(&j)));
    let mut out = vec![0.0; m];
    let mut running = 1.0f64;
    for rank in (0..m).rev() {
        let i = order[rank];
        running = running.min(p_values[i] * m as f64 / (rank + 1) as f64);
        out[i] = running.min(1.0);
    }
    Ok(out)
}
