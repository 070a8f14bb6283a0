use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::samplers::Trace;
use crate::subset::Subset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation of the per-chain estimates; 0 for one chain.
    pub std: f64,
    pub chains_used: usize,
}

fn matches(s: &Subset, given: &[(usize, bool)]) -> bool {
    given.iter().all(|&(e, inside)| s.contains(e) == inside)
}

fn combine(per_chain: &[f64]) -> (f64, f64) {
    let m = per_chain.len() as f64;
    let mean = per_chain.iter().sum::<f64>() / m;
    let std = if per_chain.len() < 2 {
        0.0
    } else {
        (per_chain.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    };
    (mean, std)
}

/// `P(target ∈ S | given)` estimated per chain from its retained samples,
/// then averaged across chains.
///
/// Chains in which the conditioning event never occurs are skipped with a
/// warning.
pub fn trace_estimate(traces: &[Trace], target: usize, given: &[(usize, bool)]) -> Result<Estimate> {
    let mut per_chain = Vec::with_capacity(traces.len());
    for (c, t) in traces.iter().enumerate() {
        let (mut hits, mut total) = (0usize, 0usize);
        for r in &t.records {
            if matches(&r.subset_after, given) {
                total += 1;
                hits += r.subset_after.contains(target) as usize;
            }
        }
        if total == 0 {
            log::warn!("chain {c} never visits the conditioning event; excluded");
            continue;
        }
        per_chain.push(hits as f64 / total as f64);
    }
    if per_chain.is_empty() {
        return Err(Error::ZeroProbabilityEvent);
    }
    let (mean, std) = combine(&per_chain);
    Ok(Estimate { mean, std, chains_used: per_chain.len() })
}

/// Running estimates over growing prefixes, every `stride` records and at
/// the end. Prefixes where no chain has seen the conditioning event are
/// omitted.
pub fn estimate_series(
    traces: &[Trace],
    target: usize,
    given: &[(usize, bool)],
    stride: usize,
) -> Result<Vec<(u64, Estimate)>> {
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be positive".into()));
    }
    let len = traces.iter().map(|t| t.records.len()).min().unwrap_or(0);
    let mut points: Vec<usize> = (1..=len / stride).map(|i| i * stride).collect();
    if len > 0 && points.last() != Some(&len) {
        points.push(len);
    }
    let mut counts = vec![(0usize, 0usize); traces.len()];
    let mut done = 0;
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        for (t, cnt) in traces.iter().zip(counts.iter_mut()) {
            for r in &t.records[done..p] {
                if matches(&r.subset_after, given) {
                    cnt.1 += 1;
                    cnt.0 += r.subset_after.contains(target) as usize;
                }
            }
        }
        done = p;
        let per_chain: Vec<f64> =
            counts.iter().filter(|c| c.1 > 0).map(|&(h, t)| h as f64 / t as f64).collect();
        if per_chain.is_empty() {
            continue;
        }
        let (mean, std) = combine(&per_chain);
        out.push((traces[0].records[p - 1].step, Estimate { mean, std, chains_used: per_chain.len() }));
    }
    Ok(out)
}

/// CSV with header `step,estimate_mean,estimate_std`.
pub fn estimate_csv(series: &[(u64, Estimate)]) -> String {
    let mut out = String::from("step,estimate_mean,estimate_std\n");
    for (s, e) in series {
        let _ = writeln!(out, "{s},{},{}", e.mean, e.std);
    }
    out
}
