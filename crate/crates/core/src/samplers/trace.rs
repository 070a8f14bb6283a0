use std::fmt::Write as _;

use super::SamplerKind;
use crate::error::{Error, Result};
use crate::model::LogWeight;
use crate::subset::{MoveKind, Subset};

/// Header line of the trace CSV format.
pub const TRACE_HEADER: &str = "step,move,accepted,subset,log_score";

/// One retained step of a chain.
///
/// `kind` is the move that was proposed; `accepted` says whether it changed
/// the state. Holds are recorded as not accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub kind: MoveKind,
    pub accepted: bool,
    pub subset_after: Subset,
    pub log_score_after: LogWeight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub model: String,
    pub constraint: String,
    pub sampler: SamplerKind,
    pub n: usize,
    pub seed: u64,
    pub chain: usize,
    pub burn_in: u64,
    pub thin: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub records: Vec<StepRecord>,
}

impl Trace {
    /// Serializes the records as CSV. Subsets are sorted 1-based labels
    /// joined by `;`; log scores use the shortest representation that
    /// parses back to the same float.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 24 + 40);
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            writeln!(out, "{},{},{},{},{}", r.step, r.kind.as_str(), r.accepted, r.subset_after, r.log_score_after)
                .expect("writing to a String");
        }
        out
    }

    /// Parses records written by [`Trace::to_csv`] over a ground set of
    /// size `n`. Errors name the offending line.
    pub fn parse_records(text: &str, n: usize) -> Result<Vec<StepRecord>> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == TRACE_HEADER => {}
            _ => return Err(Error::InvalidInput(format!("line 1: expected header {TRACE_HEADER:?}"))),
        }
        let mut records = Vec::new();
        let mut last_step = 0u64;
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| Error::InvalidInput(format!("line {}: {what}", i + 1));
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(bad("expected 5 comma-separated fields"));
            }
            let step: u64 = fields[0].parse().map_err(|_| bad("bad step"))?;
            if step <= last_step && !records.is_empty() {
                return Err(bad("steps must be strictly increasing"));
            }
            last_step = step;
            let kind = MoveKind::parse(fields[1]).ok_or_else(|| bad("bad move"))?;
            let accepted: bool = fields[2].parse().map_err(|_| bad("bad accepted flag"))?;
            let subset = Subset::parse(n, fields[3]).map_err(|e| bad(&e.to_string()))?;
            let score: f64 = fields[4].parse().map_err(|_| bad("bad log score"))?;
            if score.is_nan() {
                return Err(bad("log score is NaN"));
            }
            records.push(StepRecord {
                step,
                kind,
                accepted,
                subset_after: subset,
                log_score_after: LogWeight::new(score),
            });
        }
        Ok(records)
    }

    /// Largest 1-based label appearing in a trace CSV; useful when the
    /// ground-set size is not recorded alongside it.
    pub fn max_label(text: &str) -> usize {
        text.lines()
            .skip(1)
            .filter_map(|l| l.split(',').nth(3))
            .flat_map(|s| s.split(';'))
            .filter_map(|tok| tok.trim().parse::<usize>().ok())
            .max()
            .unwrap_or(0)
    }
}
