use crate::model::{LogWeight, SetModel};
use crate::models::{DppModel, IncrementalDpp};
use crate::subset::{Move, Subset};

/// Per-chain scoring of the current state and of single-move proposals.
///
/// A scorer may keep state tied to the chain's current subset (for example
/// a Cholesky factor), so it is never shared between chains.
pub trait Scorer {
    /// Scores `s` from scratch and makes it the tracked state.
    fn reset(&mut self, s: &Subset) -> LogWeight;

    /// Scores `current` with `mv` applied, without moving.
    fn propose(&mut self, current: &Subset, mv: Move) -> LogWeight;

    /// The chain moved to `after` via `mv`, whose score was `score`.
    fn commit(&mut self, after: &Subset, mv: Move, score: LogWeight);
}

/// Full recomputation through [`SetModel::log_unnormalized`].
pub struct Recompute<'m, M: ?Sized> {
    model: &'m M,
    scratch: Option<Subset>,
}

impl<'m, M: SetModel + ?Sized> Recompute<'m, M> {
    pub fn new(model: &'m M) -> Self {
        Self { model, scratch: None }
    }
}

impl<M: SetModel + ?Sized> Scorer for Recompute<'_, M> {
    fn reset(&mut self, s: &Subset) -> LogWeight {
        self.model.log_unnormalized(s)
    }

    fn propose(&mut self, current: &Subset, mv: Move) -> LogWeight {
        let scratch = self.scratch.get_or_insert_with(|| current.clone());
        scratch.clone_from(current);
        scratch.apply_in_place(mv).expect("proposal valid for current state");
        self.model.log_unnormalized(scratch)
    }

    fn commit(&mut self, _after: &Subset, _mv: Move, _score: LogWeight) {}
}

/// DPP scoring through rank-one Cholesky updates.
pub struct DppScorer<'a> {
    cache: IncrementalDpp<'a>,
    fallback: Recompute<'a, DppModel>,
}

impl<'a> DppScorer<'a> {
    pub fn new(model: &'a DppModel, start: &Subset) -> Self {
        Self { cache: IncrementalDpp::new(model, start), fallback: Recompute::new(model) }
    }
}

impl Scorer for DppScorer<'_> {
    fn reset(&mut self, s: &Subset) -> LogWeight {
        self.cache.resync(s);
        self.cache.model().scale(self.cache.log_det())
    }

    fn propose(&mut self, current: &Subset, mv: Move) -> LogWeight {
        if !self.cache.is_valid() {
            return self.fallback.propose(current, mv);
        }
        let log_det = match mv {
            Move::Add(t) => self.cache.log_det_with(t),
            Move::Delete(s) => self.cache.log_det_without(s),
            Move::Exchange { out, into } => self.cache.log_det_exchange(out, into),
            Move::Hold => self.cache.log_det(),
        };
        self.cache.model().scale(log_det)
    }

    fn commit(&mut self, after: &Subset, mv: Move, _score: LogWeight) {
        let (added, removed) = match mv {
            Move::Add(t) => (Some(t), None),
            Move::Delete(s) => (None, Some(s)),
            Move::Exchange { out, into } => (Some(into), Some(out)),
            Move::Hold => return,
        };
        self.cache.commit(after, added, removed);
    }
}
