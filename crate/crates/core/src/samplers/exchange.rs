use rand::Rng;

use super::{accept_log, finish_step, log_gibbs, ChainState, Recompute, Scorer, StepRecord};
use crate::constraints::ConstraintFamily;
use crate::error::{Error, Result};
use crate::model::SetModel;
use crate::subset::Move;

/// One step of the lazy Gibbs exchange chain with full recomputation.
pub fn exchange_step<M: SetModel + ?Sized>(
    model: &M,
    constraint: &ConstraintFamily,
    state: &mut ChainState,
) -> Result<StepRecord> {
    let mut scorer = Recompute::new(model);
    exchange_step_with(&mut scorer, constraint, state)
}

/// One step of the lazy Gibbs exchange chain.
///
/// Holds with probability 1/2. Otherwise draws `s` uniformly from `S`, then
/// `t` uniformly from `V ∖ S` (uniform base) or from the other members of
/// `s`'s part (partition base), and swaps with probability
/// `π(S') / (π(S) + π(S'))`.
pub fn exchange_step_with<S: Scorer + ?Sized>(
    scorer: &mut S,
    constraint: &ConstraintFamily,
    state: &mut ChainState,
) -> Result<StepRecord> {
    if !constraint.is_base_family() {
        return Err(Error::Config(format!("exchange chain needs a matroid base, got {}", constraint.describe())));
    }
    if !constraint.is_feasible(&state.current) {
        return Err(Error::Contract(format!("exchange chain state {:?} is infeasible", state.current)));
    }
    let n = state.current.ground_size();
    let k = state.current.len();
    if state.rng.random::<f64>() < 0.5 || k == 0 {
        return Ok(finish_step(state, scorer, Move::Hold, None, false));
    }
    let s = state.current.nth_member(state.rng.random_range(0..k)).expect("k > 0");
    let t = match constraint {
        ConstraintFamily::UniformBase { .. } => {
            if k == n {
                None
            } else {
                state.current.nth_non_member(state.rng.random_range(0..n - k))
            }
        }
        ConstraintFamily::PartitionBase(p) => {
            let part = p.part(p.part_of(s));
            if part.len() < 2 {
                None
            } else {
                // uniform over the part minus s
                let idx = state.rng.random_range(0..part.len() - 1);
                let pos = part.iter().position(|&x| x == s).expect("s in its part");
                Some(part[if idx >= pos { idx + 1 } else { idx }])
            }
        }
        _ => unreachable!("checked above"),
    };
    let Some(t) = t else {
        return Ok(finish_step(state, scorer, Move::Hold, None, false));
    };
    let mv = Move::Exchange { out: s, into: t };
    let proposal = scorer.propose(&state.current, mv);
    let accepted = accept_log(&mut state.rng, log_gibbs(state.score, proposal));
    Ok(finish_step(state, scorer, mv, Some(proposal), accepted))
}
