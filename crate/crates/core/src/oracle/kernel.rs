use nalgebra::DMatrix;

use super::table::{feasible_states, mask_index};
use crate::constraints::ConstraintFamily;
use crate::error::{Error, Result};
use crate::model::{gibbs_probability, log_ratio_weights, LogWeight, SetModel};
use crate::samplers::SamplerKind;
use crate::subset::Subset;

/// Largest state space for which explicit matrices are built.
pub const MAX_MATRIX_STATES: usize = 4096;

/// An explicit one-step kernel over the feasible states of a constraint,
/// in table order.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub kind: SamplerKind,
    pub states: Vec<Subset>,
    pub matrix: DMatrix<f64>,
}

impl TransitionMatrix {
    /// Largest deviation of a row sum from 1.
    pub fn row_sum_error(&self) -> f64 {
        self.matrix.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `max |π(S)P(S,T) − π(T)P(T,S)|`.
    pub fn balance_residual(&self, probs: &[f64]) -> f64 {
        let n = self.states.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((probs[i] * self.matrix[(i, j)] - probs[j] * self.matrix[(j, i)]).abs());
            }
        }
        worst
    }

    /// `max_T |Σ_S π(S)P(S,T) − π(T)|`.
    pub fn stationarity_residual(&self, probs: &[f64]) -> f64 {
        let n = self.states.len();
        (0..n)
            .map(|j| ((0..n).map(|i| probs[i] * self.matrix[(i, j)]).sum::<f64>() - probs[j]).abs())
            .fold(0.0, f64::max)
    }
}

/// `min{1, exp(log_ratio)}` with the zero-probability conventions of
/// [`log_ratio_weights`].
fn metropolis(from: LogWeight, to: LogWeight, log_correction: f64) -> f64 {
    let r = log_ratio_weights(from, to) + log_correction;
    if r >= 0.0 {
        1.0
    } else {
        r.exp()
    }
}

type DeleteFactor = fn(usize, usize) -> f64;

pub(crate) fn homogenized_delete_factor(n: usize, k: usize) -> f64 {
    (n - k + 1) as f64 / k as f64
}

/// The exact kernel of `kind` on `m` restricted to `c`, summing proposal
/// probability times acceptance over every draw. Hold mass goes on the
/// diagonal.
pub fn transition_matrix<M: SetModel + ?Sized>(m: &M, c: &ConstraintFamily, kind: SamplerKind) -> Result<TransitionMatrix> {
    kind.check_compatible(c)?;
    build(m, c, kind, homogenized_delete_factor)
}

pub(crate) fn build<M: SetModel + ?Sized>(
    m: &M,
    c: &ConstraintFamily,
    kind: SamplerKind,
    delete_factor: DeleteFactor,
) -> Result<TransitionMatrix> {
    let states = feasible_states(c)?;
    if states.len() > MAX_MATRIX_STATES {
        return Err(Error::TooLarge { what: "state space for an explicit matrix", actual: states.len(), limit: MAX_MATRIX_STATES });
    }
    let index = mask_index(&states);
    let scores: Vec<LogWeight> = states.iter().map(|s| m.log_unnormalized(s)).collect();
    let n = c.n();
    let size = states.len();
    let mut p = DMatrix::<f64>::zeros(size, size);
    let nf = n as f64;

    for (i, s) in states.iter().enumerate() {
        let mask = s.to_mask();
        let k = s.len();
        let set = |target: u64, prob: f64, p: &mut DMatrix<f64>| {
            let j = index[&target];
            p[(i, j)] += prob;
        };
        let ins: Vec<usize> = s.iter().collect();
        let outs: Vec<usize> = s.complement_iter().collect();
        let score = |target: u64| scores[index[&target]];
        match kind {
            SamplerKind::SrMix => {
                let denom = 2.0 * nf * nf;
                for &t in &outs {
                    let target = mask | 1 << t;
                    let corr = ((k + 1) as f64 / (n - k) as f64).ln();
                    set(target, (n - k) as f64 / denom * metropolis(scores[i], score(target), corr), &mut p);
                }
                for &si in &ins {
                    for &t in &outs {
                        let target = (mask & !(1 << si)) | 1 << t;
                        set(target, metropolis(scores[i], score(target), 0.0) / denom, &mut p);
                    }
                    let target = mask & !(1 << si);
                    let corr = delete_factor(n, k).ln();
                    set(target, k as f64 / denom * metropolis(scores[i], score(target), corr), &mut p);
                }
            }
            SamplerKind::Exchange => {
                for &si in &ins {
                    let pool: Vec<usize> = match c {
                        ConstraintFamily::PartitionBase(part) => {
                            part.part(part.part_of(si)).iter().copied().filter(|&x| x != si).collect()
                        }
                        _ => outs.clone(),
                    };
                    for &t in &pool {
                        let target = (mask & !(1 << si)) | 1 << t;
                        let q = 0.5 / k as f64 / pool.len() as f64;
                        set(target, q * gibbs_probability(scores[i], score(target)), &mut p);
                    }
                }
            }
            SamplerKind::AddDelete => {
                let rank = c.rank();
                let q = 0.5 / nf;
                if k < rank {
                    for &t in &outs {
                        let target = mask | 1 << t;
                        set(target, q * gibbs_probability(scores[i], score(target)), &mut p);
                    }
                }
                for &si in &ins {
                    let target = mask & !(1 << si);
                    set(target, q * gibbs_probability(scores[i], score(target)), &mut p);
                }
            }
        }
        let off: f64 = (0..size).filter(|&j| j != i).map(|j| p[(i, j)]).sum();
        p[(i, i)] = 1.0 - off;
    }
    Ok(TransitionMatrix { kind, states, matrix: p })
}
