//! Summary statistics and the pooled two-sample t-test.

use crate::CliError;

/// Two-sided 5% critical value of Student's t at 22 degrees of freedom,
/// i.e. two groups of 12 per-algorithm means.
pub const T_CRITICAL_DF22: f64 = 2.074;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub stddev: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sum of squared deviations from the mean.
fn sum_sq_dev(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    sum_sq_dev(xs, mean(xs)) / (xs.len() - 1) as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn summarize(xs: &[f64]) -> Option<Summary> {
    if xs.is_empty() {
        return None;
    }
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(Summary {
        n: xs.len(),
        mean: mean(xs),
        median: median(xs),
        min,
        max,
        stddev: sample_variance(xs).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    pub t_value: f64,
    pub df: usize,
    pub significant: bool,
}

/// Pooled-variance Student t-test with the default threshold.
pub fn ttest_two_sample(xs: &[f64], ys: &[f64]) -> Result<TTestResult, CliError> {
    ttest_two_sample_at(xs, ys, T_CRITICAL_DF22)
}

/// `significant` is `|t| > threshold`. Zero pooled variance yields an
/// infinite t when the means differ and 0 when they agree.
pub fn ttest_two_sample_at(
    xs: &[f64],
    ys: &[f64],
    threshold: f64,
) -> Result<TTestResult, CliError> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(CliError::Usage(format!(
            "t-test needs at least two values per group, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(CliError::Usage(
            "t-test input contains a non-finite value".into(),
        ));
    }
    let (n1, n2) = (xs.len() as f64, ys.len() as f64);
    let (m1, m2) = (mean(xs), mean(ys));
    let df = xs.len() + ys.len() - 2;
    let pooled = (sum_sq_dev(xs, m1) + sum_sq_dev(ys, m2)) / df as f64;
    let diff = m1 - m2;
    let t_value = if pooled == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        }
    } else {
        diff / (pooled * (1.0 / n1 + 1.0 / n2)).sqrt()
    };
    Ok(TTestResult {
        t_value,
        df,
        significant: t_value.abs() > threshold,
    })
}
