use rand::Rng;

use super::{accept_log, finish_step, ChainState, Recompute, Scorer, StepRecord};
use crate::model::{log_ratio_weights, SetModel};
use crate::subset::Move;

/// Branch boundaries of the mixed chain for a state of size `k` on `n`
/// elements, as `[0, add) [add, exchange) [exchange, delete) [delete, 1)`.
///
/// All boundaries share the denominator `2n²`, so empty branches come out as
/// exactly equal floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrMixBranches {
    pub add: f64,
    pub exchange: f64,
    pub delete: f64,
}

impl SrMixBranches {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(k <= n && n > 0);
        let (n, k) = (n as u128, k as u128);
        let denom = (2 * n * n) as f64;
        let out = n - k;
        Self {
            add: (out * out) as f64 / denom,
            exchange: (n * out) as f64 / denom,
            delete: (k * k + n * out) as f64 / denom,
        }
    }

    /// Interval lengths `(add, exchange, delete, hold)`.
    pub fn lengths(&self) -> (f64, f64, f64, f64) {
        (self.add, self.exchange - self.add, self.delete - self.exchange, 1.0 - self.delete)
    }
}

/// One step of the mixed chain with full recomputation of scores.
pub fn sr_mix_step<M: SetModel + ?Sized>(model: &M, state: &mut ChainState) -> StepRecord {
    let mut scorer = Recompute::new(model);
    sr_mix_step_with(&mut scorer, state)
}

/// One step of the mixed chain.
///
/// Draws `q ~ U[0, 1)` and picks a branch. Add and delete proposals carry
/// the cardinality correction `(|S|+1)/(N−|S|)` and `(N−|S|+1)/|S|`, the
/// ratio of binomial weights in the symmetric homogenization; with these
/// the chain is reversible with respect to `π`.
pub fn sr_mix_step_with<S: Scorer + ?Sized>(scorer: &mut S, state: &mut ChainState) -> StepRecord {
    let n = state.current.ground_size();
    let k = state.current.len();
    let branches = SrMixBranches::new(n, k);
    let q: f64 = state.rng.random();

    let (mv, log_correction) = if q < branches.add {
        let t = state.current.nth_non_member(state.rng.random_range(0..n - k)).expect("pool nonempty");
        (Move::Add(t), ((k + 1) as f64 / (n - k) as f64).ln())
    } else if q < branches.exchange {
        let s = state.current.nth_member(state.rng.random_range(0..k)).expect("pool nonempty");
        let t = state.current.nth_non_member(state.rng.random_range(0..n - k)).expect("pool nonempty");
        (Move::Exchange { out: s, into: t }, 0.0)
    } else if q < branches.delete {
        let s = state.current.nth_member(state.rng.random_range(0..k)).expect("pool nonempty");
        (Move::Delete(s), ((n - k + 1) as f64 / k as f64).ln())
    } else {
        return finish_step(state, scorer, Move::Hold, None, false);
    };

    let proposal = scorer.propose(&state.current, mv);
    let log_accept = log_ratio_weights(state.score, proposal) + log_correction;
    let accepted = accept_log(&mut state.rng, log_accept);
    finish_step(state, scorer, mv, Some(proposal), accepted)
}
