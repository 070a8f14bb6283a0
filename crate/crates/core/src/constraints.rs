//! Constraint families `C`, feasibility, and feasible starting states.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{LogWeight, SetModel};
use crate::subset::{GroundSet, Subset};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintFamily {
    /// Every subset is allowed.
    Unconstrained { n: usize },
    /// Bases of the uniform matroid: `|S| = k`.
    UniformBase { n: usize, k: usize },
    /// Bases of a partition matroid: exactly one element from each part.
    PartitionBase(Partition),
    /// Independent sets of the uniform matroid of rank `k`: `|S| ≤ k`.
    UniformRank { n: usize, k: usize },
}

/// A partition of the ground set into nonempty parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    part_of: Vec<usize>,
    parts: Vec<Vec<usize>>,
}

impl Partition {
    /// `part_of[i]` is the 1-based part label of element `i + 1`. Labels must
    /// be exactly `1..=k` for some `k`, each used at least once.
    pub fn from_labels(part_of: &[usize]) -> Result<Self> {
        GroundSet::new(part_of.len())?;
        let k = *part_of.iter().max().expect("nonempty");
        if part_of.contains(&0) {
            return Err(Error::InvalidInput("part labels are 1-based; found 0".into()));
        }
        let mut parts = vec![Vec::new(); k];
        for (i, &p) in part_of.iter().enumerate() {
            parts[p - 1].push(i);
        }
        if let Some(empty) = parts.iter().position(|p| p.is_empty()) {
            return Err(Error::InvalidInput(format!("part {} is empty; labels must be 1..={k} without gaps", empty + 1)));
        }
        Ok(Self { part_of: part_of.iter().map(|p| p - 1).collect(), parts })
    }

    /// Consecutive blocks of the given sizes.
    pub fn contiguous(sizes: &[usize]) -> Result<Self> {
        let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(p, &s)| std::iter::repeat_n(p + 1, s)).collect();
        Self::from_labels(&labels)
    }

    pub fn n(&self) -> usize {
        self.part_of.len()
    }

    /// Number of parts (the rank).
    pub fn rank(&self) -> usize {
        self.parts.len()
    }

    /// 0-based part index of 0-based element `i`.
    pub fn part_of(&self, i: usize) -> usize {
        self.part_of[i]
    }

    pub fn part(&self, p: usize) -> &[usize] {
        &self.parts[p]
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn max_part_size(&self) -> usize {
        self.parts.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// 1-based labels, as accepted by [`Partition::from_labels`].
    pub fn labels(&self) -> Vec<usize> {
        self.part_of.iter().map(|p| p + 1).collect()
    }
}

impl ConstraintFamily {
    pub fn unconstrained(n: usize) -> Result<Self> {
        GroundSet::new(n)?;
        Ok(Self::Unconstrained { n })
    }

    pub fn uniform_base(n: usize, k: usize) -> Result<Self> {
        GroundSet::new(n)?;
        check_rank(n, k)?;
        Ok(Self::UniformBase { n, k })
    }

    pub fn uniform_rank(n: usize, k: usize) -> Result<Self> {
        GroundSet::new(n)?;
        check_rank(n, k)?;
        Ok(Self::UniformRank { n, k })
    }

    pub fn partition_base(part_of: &[usize]) -> Result<Self> {
        Ok(Self::PartitionBase(Partition::from_labels(part_of)?))
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Unconstrained { n } | Self::UniformBase { n, .. } | Self::UniformRank { n, .. } => *n,
            Self::PartitionBase(p) => p.n(),
        }
    }

    /// `k` for the rank-parameterized families; the number of parts for a
    /// partition base; `n` when unconstrained.
    pub fn rank(&self) -> usize {
        match self {
            Self::Unconstrained { n } => *n,
            Self::UniformBase { k, .. } | Self::UniformRank { k, .. } => *k,
            Self::PartitionBase(p) => p.rank(),
        }
    }

    pub fn is_base_family(&self) -> bool {
        matches!(self, Self::UniformBase { .. } | Self::PartitionBase(_))
    }

    pub fn is_feasible(&self, s: &Subset) -> bool {
        debug_assert_eq!(s.ground_size(), self.n());
        match self {
            Self::Unconstrained { .. } => true,
            Self::UniformBase { k, .. } => s.len() == *k,
            Self::UniformRank { k, .. } => s.len() <= *k,
            Self::PartitionBase(p) => {
                if s.len() != p.rank() {
                    return false;
                }
                let mut seen = vec![false; p.rank()];
                for i in s.iter() {
                    let part = p.part_of(i);
                    if seen[part] {
                        return false;
                    }
                    seen[part] = true;
                }
                true
            }
        }
    }

    /// Short identifier used in trace metadata.
    pub fn describe(&self) -> String {
        match self {
            Self::Unconstrained { n } => format!("none(n={n})"),
            Self::UniformBase { n, k } => format!("uniform_base(n={n}, k={k})"),
            Self::UniformRank { n, k } => format!("uniform_rank(n={n}, k={k})"),
            Self::PartitionBase(p) => format!("partition_base(n={}, parts={})", p.n(), p.rank()),
        }
    }

    /// A feasible subset drawn from a ChaCha8 stream seeded by `seed`.
    pub fn random_feasible(&self, seed: u64) -> Subset {
        self.random_feasible_with(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform `k`-subset for a uniform base; an independent uniform pick
    /// per part for a partition base; a uniform size in `0..=k` followed by
    /// a uniform subset of that size for a uniform rank; each element
    /// independently with probability 1/2 when unconstrained.
    pub fn random_feasible_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Subset {
        let n = self.n();
        match self {
            Self::Unconstrained { .. } => Subset::from_indices(n, (0..n).filter(|_| rng.random_bool(0.5))),
            Self::UniformBase { k, .. } => Subset::from_indices(n, index::sample(rng, n, *k)),
            Self::UniformRank { k, .. } => {
                let size = rng.random_range(0..=*k);
                Subset::from_indices(n, index::sample(rng, n, size))
            }
            Self::PartitionBase(p) => {
                Subset::from_indices(n, p.parts().iter().map(|part| part[rng.random_range(0..part.len())]))
            }
        }
    }

    /// Greedy start: repeatedly add the feasibility-preserving element with
    /// the largest score gain, ties to the lowest index. Bases are filled to
    /// completion; a uniform rank stops once no addition has positive gain.
    pub fn greedy_init<M: SetModel + ?Sized>(&self, model: &M) -> Result<Subset> {
        let n = self.n();
        if model.ground().len() != n {
            return Err(Error::Config(format!(
                "model has {} elements but constraint has {n}",
                model.ground().len()
            )));
        }
        let (target, require_gain) = match self {
            Self::Unconstrained { .. } => {
                return Err(Error::Config("greedy initialization needs a base or rank constraint".into()))
            }
            Self::UniformBase { k, .. } | Self::UniformRank { k, .. } => (*k, matches!(self, Self::UniformRank { .. })),
            Self::PartitionBase(p) => (p.rank(), false),
        };
        let mut s = Subset::empty(n);
        let mut current = model.log_unnormalized(&s);
        while s.len() < target {
            let mut best: Option<(usize, LogWeight, f64)> = None;
            for i in 0..n {
                if s.contains(i) {
                    continue;
                }
                if let Self::PartitionBase(p) = self {
                    let part = p.part_of(i);
                    if s.iter().any(|j| p.part_of(j) == part) {
                        continue;
                    }
                }
                let t = Subset::from_indices(n, s.iter().chain(std::iter::once(i)));
                let w = model.log_unnormalized(&t);
                let gain = gain(current, w);
                if best.as_ref().is_none_or(|b| gain > b.2) {
                    best = Some((i, w, gain));
                }
            }
            let Some((i, w, g)) = best else { break };
            if require_gain && g.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                break;
            }
            s = Subset::from_indices(n, s.iter().chain(std::iter::once(i)));
            current = w;
        }
        debug_assert!(self.is_feasible(&s));
        Ok(s)
    }
}

fn gain(from: LogWeight, to: LogWeight) -> f64 {
    match (from.is_zero_prob(), to.is_zero_prob()) {
        (_, true) => f64::NEG_INFINITY,
        (true, false) => f64::INFINITY,
        _ => to.value() - from.value(),
    }
}

fn check_rank(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("rank k must satisfy 1 <= k <= n = {n}, got {k}")));
    }
    Ok(())
}

/// A model restricted to a constraint family: infeasible subsets get zero
/// mass.
#[derive(Debug, Clone)]
pub struct Constrained<M> {
    pub model: M,
    pub constraint: ConstraintFamily,
}

impl<M: SetModel> Constrained<M> {
    pub fn new(model: M, constraint: ConstraintFamily) -> Result<Self> {
        if model.ground().len() != constraint.n() {
            return Err(Error::Config(format!(
                "model has {} elements but constraint has {}",
                model.ground().len(),
                constraint.n()
            )));
        }
        Ok(Self { model, constraint })
    }
}

impl<M: SetModel> SetModel for Constrained<M> {
    fn ground(&self) -> GroundSet {
        self.model.ground()
    }

    fn beta(&self) -> f64 {
        self.model.beta()
    }

    fn log_unnormalized(&self, s: &Subset) -> LogWeight {
        if self.constraint.is_feasible(s) {
            self.model.log_unnormalized(s)
        } else {
            LogWeight::ZERO_PROB
        }
    }

    fn describe(&self) -> String {
        format!("{} | {}", self.model.describe(), self.constraint.describe())
    }
}
