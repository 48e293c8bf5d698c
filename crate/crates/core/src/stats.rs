//! Descriptive statistics and the Mann–Whitney U two-sample test.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Largest per-sample size for which the exact null distribution is used.
pub const EXACT_THRESHOLD: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UTestMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UTestResult {
    /// U of the first sample: its rank sum minus n1(n1+1)/2.
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: UTestMethod,
}

/// Population mean, variance (denominator n), minimum and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

pub fn descriptive(values: &[f64]) -> Result<Descriptive> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("descriptive statistics of an empty sample".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Rounding can put the mean a hair outside [min, max] for constant input.
    Ok(Descriptive {
        mean: mean.clamp(min, max),
        variance,
        min,
        max,
    })
}

/// Midranks (1-based) of `values`, plus the sizes of every tie group.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end share the average of ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        if end - start > 1 {
            ties.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

/// Number of arrangements yielding each U value, for sample sizes (m, n)
/// without ties. Index u holds the count for U = u.
fn exact_u_counts(m: usize, n: usize) -> Vec<f64> {
    // counts[j][u] for the current first-sample size and second-sample size j
    let max_u = m * n;
    let mut prev: Vec<Vec<f64>> = (0..=n).map(|_| {
        let mut v = vec![0.0; max_u + 1];
        v[0] = 1.0;
        v
    }).collect();
    for i in 1..=m {
        let mut cur: Vec<Vec<f64>> = vec![vec![0.0; max_u + 1]; n + 1];
        cur[0][0] = 1.0;
        for j in 1..=n {
            for u in 0..=i * j {
                // largest element belongs to the first sample (adds j) or the second
                let from_first = if u >= j { prev[j][u - j] } else { 0.0 };
                cur[j][u] = from_first + cur[j - 1][u];
            }
        }
        prev = cur;
    }
    prev.swap_remove(n)
}

fn exact_two_sided(u: f64, m: usize, n: usize) -> f64 {
    let counts = exact_u_counts(m, n);
    let total: f64 = counts.iter().sum();
    let u = u.round() as usize;
    let lower: f64 = counts[..=u].iter().sum();
    let upper: f64 = counts[u..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

/// Two-sided Mann–Whitney U test.
///
/// Exact null distribution when both samples have at most
/// [`EXACT_THRESHOLD`] values and there are no ties; otherwise the normal
/// approximation with tie-corrected variance and a 0.5 continuity correction.
pub fn mann_whitney_u(xs: &[f64], ys: &[f64], alternative: Alternative) -> Result<UTestResult> {
    mann_whitney_u_using(xs, ys, alternative, None)
}

/// [`mann_whitney_u`] with the p-value method forced. The exact method
/// rejects tied samples.
pub fn mann_whitney_u_using(
    xs: &[f64],
    ys: &[f64],
    alternative: Alternative,
    method: Option<UTestMethod>,
) -> Result<UTestResult> {
    let Alternative::TwoSided = alternative;
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidParameter("Mann-Whitney U needs two non-empty samples".into()));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("Mann-Whitney U sample contains NaN".into()));
    }
    let (n1, n2) = (xs.len(), ys.len());
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum_x: f64 = ranks[..n1].iter().sum();
    let u = rank_sum_x - (n1 * (n1 + 1)) as f64 / 2.0;

    let method = method.unwrap_or(if n1 <= EXACT_THRESHOLD && n2 <= EXACT_THRESHOLD && ties.is_empty() {
        UTestMethod::Exact
    } else {
        UTestMethod::NormalApprox
    });
    let p_value = match method {
        UTestMethod::Exact if !ties.is_empty() => {
            return Err(Error::InvalidParameter("exact Mann-Whitney p-value needs tie-free samples".into()));
        }
        UTestMethod::Exact => exact_two_sided(u, n1, n2),
        UTestMethod::NormalApprox => approx_two_sided(u, n1, n2, &ties),
    };
    Ok(UTestResult {
        u_statistic: u,
        p_value,
        method,
    })
}

fn approx_two_sided(u: f64, n1: usize, n2: usize, ties: &[usize]) -> f64 {
    let (f1, f2) = (n1 as f64, n2 as f64);
    let n = f1 + f2;
    let mean = f1 * f2 / 2.0;
    let tie_term = if n > 1.0 {
        ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0))
    } else {
        0.0
    };
    let variance = f1 * f2 / 12.0 * ((n + 1.0) - tie_term);
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}
