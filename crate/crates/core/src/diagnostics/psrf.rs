use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::samplers::Trace;

/// The scalar tracked per retained sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticKind {
    /// 1 if the (0-based) element is in the sample, else 0.
    Membership(usize),
    LogScore,
}

/// One scalar series per chain, all of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStatistic {
    pub kind: StatisticKind,
    /// Step numbers shared by every chain.
    pub steps: Vec<u64>,
    pub values: Vec<Vec<f64>>,
}

impl TraceStatistic {
    pub fn from_traces(traces: &[Trace], kind: StatisticKind) -> Result<Self> {
        let first = traces.first().ok_or_else(|| Error::InvalidInput("no traces".into()))?;
        let steps: Vec<u64> = first.records.iter().map(|r| r.step).collect();
        let mut values = Vec::with_capacity(traces.len());
        for (c, t) in traces.iter().enumerate() {
            if t.records.len() != steps.len() || t.records.iter().zip(&steps).any(|(r, &s)| r.step != s) {
                return Err(Error::InvalidInput(format!("chain {c} is not aligned with chain 0")));
            }
            values.push(
                t.records
                    .iter()
                    .map(|r| match kind {
                        StatisticKind::Membership(e) => r.subset_after.contains(e) as u8 as f64,
                        StatisticKind::LogScore => r.log_score_after.value(),
                    })
                    .collect(),
            );
        }
        Ok(Self { kind, steps, values })
    }

    pub fn from_values(kind: StatisticKind, values: Vec<Vec<f64>>) -> Result<Self> {
        let len = values.first().map_or(0, Vec::len);
        if values.iter().any(|v| v.len() != len) {
            return Err(Error::InvalidInput("chains differ in length".into()));
        }
        Ok(Self { kind, steps: (1..=len as u64).collect(), values })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Gelman–Rubin `R̂` over the first `at_step` entries of every chain.
///
/// `B/n` is the variance of the chain means and `W` the mean within-chain
/// variance, both unbiased. `W = 0` gives 1 if the means agree and +∞
/// otherwise.
pub fn psrf(stat: &TraceStatistic, at_step: usize) -> Result<f64> {
    let m = stat.values.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!("PSRF needs at least 2 chains, got {m}")));
    }
    if at_step < 2 || at_step > stat.len() {
        return Err(Error::InvalidInput(format!("at_step must lie in 2..={}, got {at_step}", stat.len())));
    }
    let n = at_step as f64;
    let (means, vars): (Vec<f64>, Vec<f64>) = stat.values.iter().map(|v| mean_var(&v[..at_step])).unzip();
    let w = vars.iter().sum::<f64>() / m as f64;
    let b = n * mean_var(&means).1;
    if w == 0.0 {
        return Ok(if b == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok((((n - 1.0) / n * w + b / n) / w).sqrt())
}

/// Every 2% of the series, at least one entry apart.
pub fn default_stride(len: usize) -> usize {
    (len / 50).max(1)
}

/// `(step, R̂)` at every `stride`-th entry and at the last one.
pub fn psrf_series(stat: &TraceStatistic, stride: usize) -> Result<Vec<(u64, f64)>> {
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be positive".into()));
    }
    let len = stat.len();
    let mut points: Vec<usize> = (1..=len / stride).map(|i| i * stride).filter(|&n| n >= 2).collect();
    if len >= 2 && points.last() != Some(&len) {
        points.push(len);
    }
    points.into_iter().map(|n| Ok((stat.steps[n - 1], psrf(stat, n)?))).collect()
}

/// `(step, R̂)` like [`psrf_series`], but each point uses only the second
/// half of the entries seen so far (entries `⌊n/2⌋..n`), so the start-up
/// transient drops out as the run grows.
pub fn psrf_series_half_window(stat: &TraceStatistic, stride: usize) -> Result<Vec<(u64, f64)>> {
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be positive".into()));
    }
    let m = stat.values.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!("PSRF needs at least 2 chains, got {m}")));
    }
    let len = stat.len();
    let centre = stat.values.iter().flatten().sum::<f64>() / (m * len).max(1) as f64;
    // prefix sums of centred values, one pair per chain
    let sums: Vec<(Vec<f64>, Vec<f64>, f64)> = stat
        .values
        .iter()
        .map(|v| {
            let (mut s1, mut s2) = (vec![0.0; len + 1], vec![0.0; len + 1]);
            for (i, x) in v.iter().enumerate() {
                let y = x - centre;
                s1[i + 1] = s1[i] + y;
                s2[i + 1] = s2[i] + y * y;
            }
            let scale = v.iter().map(|x| (x - centre).powi(2)).fold(0.0, f64::max);
            (s1, s2, scale)
        })
        .collect();
    let mut points: Vec<usize> = (1..=len / stride).map(|i| i * stride).filter(|&n| n >= 4).collect();
    if len >= 4 && points.last() != Some(&len) {
        points.push(len);
    }
    let series = points
        .into_iter()
        .map(|end| {
            let start = end / 2;
            let n = (end - start) as f64;
            let mut means = Vec::with_capacity(m);
            let mut w = 0.0;
            for (s1, s2, scale) in &sums {
                let a = s1[end] - s1[start];
                let mean = a / n;
                let mut var = (s2[end] - s2[start] - a * mean) / (n - 1.0);
                if var <= 1e-12 * scale.max(1.0) {
                    var = 0.0;
                }
                means.push(mean);
                w += var;
            }
            w /= m as f64;
            let mbar = means.iter().sum::<f64>() / m as f64;
            let mut b = n * means.iter().map(|x| (x - mbar).powi(2)).sum::<f64>() / (m as f64 - 1.0);
            let spread = sums.iter().map(|s| s.2).fold(0.0, f64::max);
            if b <= 1e-12 * n * spread.max(1.0) {
                b = 0.0;
            }
            let r = if w == 0.0 {
                if b == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                (((n - 1.0) / n * w + b / n) / w).sqrt()
            };
            (stat.steps[end - 1], r)
        })
        .collect();
    Ok(series)
}

/// CSV with header `step,psrf`.
pub fn psrf_csv(series: &[(u64, f64)]) -> String {
    let mut out = String::from("step,psrf\n");
    for (s, r) in series {
        let _ = writeln!(out, "{s},{r}");
    }
    out
}
