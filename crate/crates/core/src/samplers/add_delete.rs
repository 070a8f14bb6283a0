use rand::Rng;

use super::{accept_log, finish_step, log_gibbs, ChainState, Recompute, Scorer, StepRecord};
use crate::constraints::ConstraintFamily;
use crate::error::{Error, Result};
use crate::model::SetModel;
use crate::subset::Move;

/// One step of the lazy Gibbs add/delete chain with full recomputation.
pub fn add_delete_step<M: SetModel + ?Sized>(
    model: &M,
    constraint: &ConstraintFamily,
    state: &mut ChainState,
) -> Result<StepRecord> {
    let mut scorer = Recompute::new(model);
    add_delete_step_with(&mut scorer, constraint, state)
}

/// One step of the lazy Gibbs add/delete chain on `|S| ≤ k`.
///
/// Holds with probability 1/2; otherwise draws `s ∈ V` uniformly and adds
/// it with probability `p⁺(S, s)` if `s ∉ S` and there is room, deletes it
/// with probability `p⁻(S, s)` if `s ∈ S`, and holds if `s ∉ S` and `|S| = k`.
pub fn add_delete_step_with<S: Scorer + ?Sized>(
    scorer: &mut S,
    constraint: &ConstraintFamily,
    state: &mut ChainState,
) -> Result<StepRecord> {
    let ConstraintFamily::UniformRank { k, .. } = *constraint else {
        return Err(Error::Config(format!("add/delete chain needs a uniform rank, got {}", constraint.describe())));
    };
    if !constraint.is_feasible(&state.current) {
        return Err(Error::Contract(format!("add/delete chain state {:?} is infeasible", state.current)));
    }
    let n = state.current.ground_size();
    if state.rng.random::<f64>() < 0.5 {
        return Ok(finish_step(state, scorer, Move::Hold, None, false));
    }
    let s = state.rng.random_range(0..n);
    let mv = if state.current.contains(s) {
        Move::Delete(s)
    } else if state.current.len() < k {
        Move::Add(s)
    } else {
        return Ok(finish_step(state, scorer, Move::Hold, None, false));
    };
    let proposal = scorer.propose(&state.current, mv);
    let accepted = accept_log(&mut state.rng, log_gibbs(state.score, proposal));
    Ok(finish_step(state, scorer, mv, Some(proposal), accepted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModularModel;
    use crate::samplers::{chain_rng, SamplerKind};
    use crate::subset::{MoveKind, Subset};

    #[test]
    fn single_element_add_probability() {
        // w = (ln 3), S = ∅: p+ = 3/4, and the only draw is s = 1
        let m = ModularModel::new(vec![3f64.ln()], 1.0).unwrap();
        let c = ConstraintFamily::uniform_rank(1, 1).unwrap();
        let mut scorer = Recompute::new(&m);
        let (mut proposals, mut adds) = (0, 0);
        for seed in 0..40_000 {
            let mut st = ChainState::new(SamplerKind::AddDelete, Subset::empty(1), &mut scorer, chain_rng(seed, 3));
            let rec = add_delete_step_with(&mut scorer, &c, &mut st).unwrap();
            if rec.kind == MoveKind::Add {
                proposals += 1;
                adds += rec.accepted as usize;
            }
        }
        let p = adds as f64 / proposals as f64;
        assert!((p - 0.75).abs() < 0.01, "{p}");
    }

    #[test]
    fn full_set_holds_on_outside_draw() {
        let m = ModularModel::constant(5).unwrap();
        let c = ConstraintFamily::uniform_rank(5, 2).unwrap();
        let mut scorer = Recompute::new(&m);
        for seed in 0..2000 {
            let s0 = Subset::from_one_based(5, &[2, 4]).unwrap();
            let mut st = ChainState::new(SamplerKind::AddDelete, s0.clone(), &mut scorer, chain_rng(seed, 0));
            let rec = add_delete_step_with(&mut scorer, &c, &mut st).unwrap();
            assert_ne!(rec.kind, MoveKind::Add);
            if rec.kind == MoveKind::Hold {
                assert_eq!(rec.subset_after, s0);
            }
        }
    }

    #[test]
    fn constant_f_add_probability_is_half() {
        let m = ModularModel::constant(8).unwrap();
        let c = ConstraintFamily::uniform_rank(8, 8).unwrap();
        let mut scorer = Recompute::new(&m);
        let mut st = ChainState::new(SamplerKind::AddDelete, Subset::empty(8), &mut scorer, chain_rng(1, 0));
        let (mut proposals, mut adds) = (0, 0);
        for _ in 0..40_000 {
            let rec = add_delete_step_with(&mut scorer, &c, &mut st).unwrap();
            if rec.kind == MoveKind::Add {
                proposals += 1;
                adds += rec.accepted as usize;
            }
        }
        let p = adds as f64 / proposals as f64;
        assert!((p - 0.5).abs() < 0.015, "{p}");
    }
}
