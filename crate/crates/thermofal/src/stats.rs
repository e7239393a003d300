//! Summary statistics for run comparisons.

use serde::{Deserialize, Serialize};

/// Boxplot-ready five-number summary plus mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

pub fn mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "mean of empty series");
    values.iter().sum::<f64>() / values.len() as f64
}

/// Linearly interpolated quantile of a sorted slice (the common
/// spreadsheet definition).
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.5)
}

pub fn summarize(values: &[f64]) -> SeriesSummary {
    assert!(!values.is_empty(), "summary of empty series");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    SeriesSummary {
        n: sorted.len(),
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        mean: mean(values),
    }
}

/// Two-sample rank-sum comparison (Mann-Whitney U) with a normal
/// approximation for the p-value.  A supplementary diagnostic for run
/// comparisons, not a full exact test: for fewer than ~8 runs per side
/// the approximation is coarse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumTest {
    /// U statistic of the first sample.
    pub u: f64,
    /// Normal-approximation z score.
    pub z: f64,
    /// Two-sided p-value under the normal approximation.
    pub p_value: f64,
}

pub fn rank_sum_test(a: &[f64], b: &[f64]) -> RankSumTest {
    assert!(!a.is_empty() && !b.is_empty(), "rank test needs both samples");
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let n = na + nb;

    let mut combined: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    combined.sort_by(|x, y| x.0.total_cmp(&y.0));

    // Average ranks over ties; accumulate the tie correction term.
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < combined.len() {
        let mut j = i;
        while j < combined.len() && combined[j].0 == combined[i].0 {
            j += 1;
        }
        let tied = (j - i) as f64;
        let avg_rank = (i + j + 1) as f64 / 2.0; // 1-based
        rank_sum_a += avg_rank * combined[i..j].iter().filter(|&&(_, ia)| ia).count() as f64;
        tie_term += tied * tied * tied - tied;
        i = j;
    }

    let u = rank_sum_a - na * (na + 1.0) / 2.0;
    let mean_u = na * nb / 2.0;
    let var_u = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let (z, p_value) = if var_u > 0.0 {
        let z = (u - mean_u) / var_u.sqrt();
        (z, 2.0 * (1.0 - normal_cdf(z.abs())).clamp(0.0, 0.5))
    } else {
        (0.0, 1.0)
    };
    RankSumTest { u, z, p_value }
}

/// Standard normal CDF via the Abramowitz-Stegun 7.1.26 erf polynomial
/// (absolute error below 1.5e-7, plenty for a diagnostic p-value).
fn normal_cdf(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * z.abs());
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-z * z).exp();
    let signed = if x < 0.0 { -erf } else { erf };
    0.5 * (1.0 + signed)
}
