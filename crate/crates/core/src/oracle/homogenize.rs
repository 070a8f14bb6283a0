use std::fmt::Write as _;

use super::kernel::transition_matrix;
use super::table::mask_index;
use crate::constraints::ConstraintFamily;
use crate::error::{Error, Result};
use crate::model::{log_ratio_weights, LogWeight, SetModel};
use crate::samplers::SamplerKind;
use crate::subset::Subset;

/// Largest ground set for the `2N`-element comparison.
pub const MAX_HOMOGENIZED_N: usize = 8;

/// Entrywise agreement required between the two kernels.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub n: usize,
    /// Largest spread of a lumped row across the `2N` states that project
    /// onto the same subset.
    pub lumping_residual: f64,
    pub max_abs_diff: f64,
    /// `(from, to, lumped, direct)` at the largest difference.
    pub worst: Option<(Subset, Subset, f64, f64)>,
}

impl EquivalenceReport {
    pub fn agrees(&self) -> bool {
        self.max_abs_diff <= EQUIVALENCE_TOLERANCE && self.lumping_residual <= EQUIVALENCE_TOLERANCE
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "lumping_residual = {}", self.lumping_residual);
        let _ = writeln!(out, "max_abs_diff = {}", self.max_abs_diff);
        if let Some((from, to, a, b)) = &self.worst {
            let _ = writeln!(out, "worst_from = {from}");
            let _ = writeln!(out, "worst_to = {to}");
            let _ = writeln!(out, "worst_lumped = {a}");
            let _ = writeln!(out, "worst_direct = {b}");
        }
        let _ = writeln!(out, "agrees = {}", self.agrees());
        out
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Builds the lazy Metropolis base-exchange chain on `N`-subsets of `2N`
/// elements (the last `N` being dummies) targeting
/// `π(R ∩ V) / C(N, |R ∩ V|)`, projects it onto `R ∩ V`, and compares the
/// result with the mixed chain's kernel on `V`.
pub fn homogenized_equivalence_check<M: SetModel + ?Sized>(m: &M) -> Result<EquivalenceReport> {
    let n = m.ground().len();
    if n > MAX_HOMOGENIZED_N {
        return Err(Error::TooLarge { what: "ground set for the homogenized chain", actual: n, limit: MAX_HOMOGENIZED_N });
    }
    let direct = transition_matrix(m, &ConstraintFamily::unconstrained(n)?, SamplerKind::SrMix)?;
    let index = mask_index(&direct.states);
    let size = direct.states.len();
    let low = (1u32 << n) - 1;

    let log_pi: Vec<LogWeight> = (0..1u64 << n).map(|mask| m.log_unnormalized(&Subset::from_mask(n, mask))).collect();
    let log_sh = |r: u32| {
        let s = r & low;
        let w = log_pi[s as usize];
        if w.is_zero_prob() {
            w
        } else {
            LogWeight::new(w.value() - binomial(n, s.count_ones() as usize).ln())
        }
    };

    let mut lumped: Vec<Option<Vec<f64>>> = vec![None; size];
    let mut lumping_residual = 0.0f64;
    let q = 0.5 / (n * n) as f64;
    for r in 0u32..(1 << (2 * n)) {
        if r.count_ones() as usize != n {
            continue;
        }
        let from = r & low;
        let mut row = vec![0.0; size];
        let here = log_sh(r);
        let mut moved = 0.0;
        for s in (0..2 * n).filter(|&s| r >> s & 1 == 1) {
            for t in (0..2 * n).filter(|&t| r >> t & 1 == 0) {
                let next = (r & !(1 << s)) | 1 << t;
                let ratio = log_ratio_weights(here, log_sh(next));
                let acc = if ratio >= 0.0 { 1.0 } else { ratio.exp() };
                let p = q * acc;
                let to = next & low;
                if to != from {
                    row[index[&(to as u64)]] += p;
                    moved += p;
                }
            }
        }
        let i = index[&(from as u64)];
        row[i] = 1.0 - moved;
        match &lumped[i] {
            None => lumped[i] = Some(row),
            Some(prev) => {
                for (a, b) in prev.iter().zip(&row) {
                    lumping_residual = lumping_residual.max((a - b).abs());
                }
            }
        }
    }

    let mut report = EquivalenceReport { n, lumping_residual, max_abs_diff: 0.0, worst: None };
    for (i, row) in lumped.iter().enumerate() {
        let row = row.as_ref().expect("every subset of V is the trace of some N-subset of 2N");
        for (j, &a) in row.iter().enumerate() {
            let b = direct.matrix[(i, j)];
            let d = (a - b).abs();
            if d > report.max_abs_diff || report.worst.is_none() {
                report.max_abs_diff = report.max_abs_diff.max(d);
                report.worst = Some((direct.states[i].clone(), direct.states[j].clone(), a, b));
            }
        }
    }
    Ok(report)
}
