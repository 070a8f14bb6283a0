//! Log-space weights and the scoring contract shared by every model.

use std::cmp::Ordering;
use std::fmt;

use crate::samplers::Scorer;
use crate::subset::{GroundSet, Subset};

/// A natural-log weight. Negative infinity is probability zero.
///
/// Never NaN.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ZERO_PROB: LogWeight = LogWeight(f64::NEG_INFINITY);
    pub const ONE: LogWeight = LogWeight(0.0);

    /// Panics on NaN.
    pub fn new(value: f64) -> Self {
        assert!(!value.is_nan(), "log weight must not be NaN");
        LogWeight(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero_prob(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Debug for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogWeight({})", self.0)
    }
}

impl fmt::Display for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl From<LogWeight> for f64 {
    fn from(w: LogWeight) -> f64 {
        w.0
    }
}

/// A distribution `π(S) ∝ exp(β F(S))` over subsets of a ground set.
///
/// Implementations must be deterministic: scoring the same subset twice
/// gives bit-identical results. Models are immutable and shared read-only
/// across chains.
pub trait SetModel: Send + Sync {
    fn ground(&self) -> GroundSet;

    /// Inverse temperature β.
    fn beta(&self) -> f64;

    /// `β F(S)`, or negative infinity where the model assigns zero mass.
    fn log_unnormalized(&self, s: &Subset) -> LogWeight;

    /// Short identifier used in trace metadata.
    fn describe(&self) -> String {
        format!("model(n={}, beta={})", self.ground().len(), self.beta())
    }

    /// A scorer that updates incrementally from `start`, if the model has one.
    fn incremental_scorer<'a>(&'a self, _start: &Subset) -> Option<Box<dyn Scorer + 'a>> {
        None
    }
}

impl<M: SetModel + ?Sized> SetModel for &M {
    fn ground(&self) -> GroundSet {
        (**self).ground()
    }
    fn beta(&self) -> f64 {
        (**self).beta()
    }
    fn log_unnormalized(&self, s: &Subset) -> LogWeight {
        (**self).log_unnormalized(s)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn incremental_scorer<'a>(&'a self, start: &Subset) -> Option<Box<dyn Scorer + 'a>> {
        (**self).incremental_scorer(start)
    }
}

impl<M: SetModel + ?Sized> SetModel for Box<M> {
    fn ground(&self) -> GroundSet {
        (**self).ground()
    }
    fn beta(&self) -> f64 {
        (**self).beta()
    }
    fn log_unnormalized(&self, s: &Subset) -> LogWeight {
        (**self).log_unnormalized(s)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn incremental_scorer<'a>(&'a self, start: &Subset) -> Option<Box<dyn Scorer + 'a>> {
        (**self).incremental_scorer(start)
    }
}

/// Difference of log weights with the zero-probability conventions used for
/// acceptance ratios: a zero-probability target always gives `-inf`, even
/// from a zero-probability source; a zero-probability source with a
/// positive target gives `+inf`.
pub fn log_ratio_weights(from: LogWeight, to: LogWeight) -> f64 {
    if to.is_zero_prob() {
        f64::NEG_INFINITY
    } else if from.is_zero_prob() {
        f64::INFINITY
    } else {
        to.0 - from.0
    }
}

/// `log π(t) − log π(s)` under `m`.
pub fn log_ratio<M: SetModel + ?Sized>(m: &M, s: &Subset, t: &Subset) -> LogWeight {
    LogWeight::new(log_ratio_weights(m.log_unnormalized(s), m.log_unnormalized(t)))
}

/// `log(exp(a) + exp(b))` with `-inf` handled.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Heat-bath probability `π(T) / (π(S) + π(T))` from the two log weights.
///
/// Two zero-probability states give 1/2 by symmetry; callers never reach
/// that case from a feasible chain state.
pub fn gibbs_probability(from: LogWeight, to: LogWeight) -> f64 {
    match (from.is_zero_prob(), to.is_zero_prob()) {
        (true, true) => 0.5,
        (_, true) => 0.0,
        (true, false) => 1.0,
        (false, false) => {
            let d = to.0 - from.0;
            // logistic, written to stay accurate in both tails
            if d >= 0.0 {
                1.0 / (1.0 + (-d).exp())
            } else {
                let e = d.exp();
                e / (1.0 + e)
            }
        }
    }
}
