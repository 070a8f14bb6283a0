//! The three Markov chains and a deterministic multi-chain runner.
//!
//! * [`SamplerKind::SrMix`]: the mixed add / exchange / delete chain for
//!   strongly Rayleigh targets on an unconstrained ground set.
//! * [`SamplerKind::Exchange`]: the lazy Gibbs exchange chain on uniform or
//!   partition matroid bases.
//! * [`SamplerKind::AddDelete`]: the lazy Gibbs add/delete chain on a
//!   uniform matroid `|S| ≤ k`.
//!
//! Every loop iteration counts as one step, including lazy holds and
//! rejected proposals.

mod add_delete;
mod exchange;
mod runner;
mod scorer;
mod sr_mix;
mod trace;

pub use add_delete::{add_delete_step, add_delete_step_with};
pub use exchange::{exchange_step, exchange_step_with};
pub use runner::{chain_rng, run_chains, Init, RunOptions};
pub use scorer::{DppScorer, Recompute, Scorer};
pub use sr_mix::{sr_mix_step, sr_mix_step_with, SrMixBranches};
pub use trace::{StepRecord, Trace, TraceMeta, TRACE_HEADER};

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;

use crate::constraints::ConstraintFamily;
use crate::error::{Error, Result};
use crate::model::{log_add_exp, LogWeight};
use crate::subset::Subset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    SrMix,
    Exchange,
    AddDelete,
}

impl SamplerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::SrMix => "sr_mix",
            SamplerKind::Exchange => "exchange",
            SamplerKind::AddDelete => "add_delete",
        }
    }

    /// Checks the sampler/constraint pairing: the mixed chain needs an
    /// unconstrained ground set, the exchange chain a matroid base, and the
    /// add/delete chain a uniform rank.
    pub fn check_compatible(&self, c: &ConstraintFamily) -> Result<()> {
        let ok = match self {
            SamplerKind::SrMix => matches!(c, ConstraintFamily::Unconstrained { .. }),
            SamplerKind::Exchange => c.is_base_family(),
            SamplerKind::AddDelete => matches!(c, ConstraintFamily::UniformRank { .. }),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("sampler {} cannot run on constraint {}", self.as_str(), c.describe())))
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sr_mix" | "mix" => Ok(SamplerKind::SrMix),
            "exchange" => Ok(SamplerKind::Exchange),
            "add_delete" => Ok(SamplerKind::AddDelete),
            other => Err(Error::Config(format!("unknown sampler {other:?}; expected sr_mix, exchange or add_delete"))),
        }
    }
}

/// The state one chain carries between steps.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub current: Subset,
    /// Cached `log π(current)` (unnormalized).
    pub score: LogWeight,
    pub step_count: u64,
    pub rng: ChaCha8Rng,
    pub kind: SamplerKind,
}

impl ChainState {
    pub fn new<S: Scorer + ?Sized>(kind: SamplerKind, start: Subset, scorer: &mut S, rng: ChaCha8Rng) -> Self {
        let score = scorer.reset(&start);
        Self { current: start, score, step_count: 0, rng, kind }
    }
}

/// `log(π(T) / (π(S) + π(T)))`.
pub(crate) fn log_gibbs(from: LogWeight, to: LogWeight) -> f64 {
    if to.is_zero_prob() {
        return f64::NEG_INFINITY;
    }
    if from.is_zero_prob() {
        return 0.0;
    }
    to.value() - log_add_exp(from.value(), to.value())
}

/// Accepts when `ln u < log_accept`, with `u` uniform on `[0, 1)`.
pub(crate) fn accept_log(rng: &mut ChaCha8Rng, log_accept: f64) -> bool {
    use rand::Rng;
    debug_assert!(!log_accept.is_nan());
    debug_assert!((0.0..=1.0).contains(&log_accept.min(0.0).exp()));
    if log_accept >= 0.0 {
        // still consume a draw so the stream position does not depend on the ratio
        let _ = rng.random::<f64>();
        return true;
    }
    let u: f64 = rng.random();
    u.ln() < log_accept
}

/// Applies the step outcome to `state` and produces its record.
pub(crate) fn finish_step<S: Scorer + ?Sized>(
    state: &mut ChainState,
    scorer: &mut S,
    mv: crate::subset::Move,
    proposal_score: Option<LogWeight>,
    accepted: bool,
) -> StepRecord {
    state.step_count += 1;
    if accepted {
        state
            .current
            .apply_in_place(mv)
            .expect("samplers only propose moves valid for the current state");
        let score = proposal_score.expect("accepted moves carry a score");
        scorer.commit(&state.current, mv, score);
        state.score = score;
    }
    StepRecord {
        step: state.step_count,
        kind: mv.kind(),
        accepted,
        subset_after: state.current.clone(),
        log_score_after: state.score,
    }
}
