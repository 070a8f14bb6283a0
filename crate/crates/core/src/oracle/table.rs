use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::constraints::ConstraintFamily;
use crate::error::{Error, Result};
use crate::model::{log_add_exp, SetModel};
use crate::subset::Subset;

/// Largest ground set [`enumerate_distribution`] accepts.
pub const MAX_ENUMERATION_N: usize = 20;

/// The exact constrained distribution over every feasible subset.
#[derive(Debug, Clone)]
pub struct ExactTable {
    pub n: usize,
    /// Feasible subsets ordered by size, then lexicographically by their
    /// sorted members.
    pub states: Vec<Subset>,
    pub probs: Vec<f64>,
    /// Unnormalized `log π` per state.
    pub log_scores: Vec<f64>,
    pub log_z_constrained: f64,
    /// Log partition function over all `2^N` subsets, ignoring the constraint.
    pub log_z_total: f64,
    index: HashMap<u64, usize>,
}

impl ExactTable {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: &Subset) -> Option<usize> {
        if s.ground_size() != self.n {
            return None;
        }
        self.index.get(&s.to_mask()).copied()
    }

    pub fn prob(&self, s: &Subset) -> f64 {
        self.index_of(s).map_or(0.0, |i| self.probs[i])
    }

    /// The most probable state; ties go to the earliest in table order.
    pub fn mode(&self) -> &Subset {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        &self.states[best]
    }

    /// Inclusion probability of every element.
    pub fn marginals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (s, &p) in self.states.iter().zip(&self.probs) {
            for i in s.iter() {
                out[i] += p;
            }
        }
        out
    }

    /// CSV with header `subset,prob,log_score`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subset,prob,log_score\n");
        for ((s, p), l) in self.states.iter().zip(&self.probs).zip(&self.log_scores) {
            writeln!(out, "{s},{p},{l}").expect("writing to a String");
        }
        out
    }
}

/// Feasible subsets of `c` in table order.
pub fn feasible_states(c: &ConstraintFamily) -> Result<Vec<Subset>> {
    let n = c.n();
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge { what: "ground set for enumeration", actual: n, limit: MAX_ENUMERATION_N });
    }
    let mut states: Vec<Subset> =
        (0..1u64 << n).map(|mask| Subset::from_mask(n, mask)).filter(|s| c.is_feasible(s)).collect();
    states.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    Ok(states)
}

pub(crate) fn mask_index(states: &[Subset]) -> HashMap<u64, usize> {
    states.iter().enumerate().map(|(i, s)| (s.to_mask(), i)).collect()
}

/// Enumerates `π_C` exactly. Refuses `N > 20`.
pub fn enumerate_distribution<M: SetModel + ?Sized>(m: &M, c: &ConstraintFamily) -> Result<ExactTable> {
    let n = c.n();
    if m.ground().len() != n {
        return Err(Error::InvalidInput(format!("model has {} elements, constraint {n}", m.ground().len())));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge { what: "ground set for enumeration", actual: n, limit: MAX_ENUMERATION_N });
    }
    let all: Vec<f64> =
        (0..1u64 << n).into_par_iter().map(|mask| m.log_unnormalized(&Subset::from_mask(n, mask)).value()).collect();
    let log_z_total = all.iter().fold(f64::NEG_INFINITY, |acc, &l| log_add_exp(acc, l));

    let states = feasible_states(c)?;
    let log_scores: Vec<f64> = states.iter().map(|s| all[s.to_mask() as usize]).collect();
    let log_z_constrained = log_scores.iter().fold(f64::NEG_INFINITY, |acc, &l| log_add_exp(acc, l));
    if log_z_constrained == f64::NEG_INFINITY {
        return Err(Error::InvalidInput(format!("no subset feasible for {} has positive probability", c.describe())));
    }
    let probs = log_scores.iter().map(|&l| (l - log_z_constrained).exp()).collect();
    let index = mask_index(&states);
    Ok(ExactTable { n, states, probs, log_scores, log_z_constrained, log_z_total, index })
}

/// `P(target ∈ S | given)` under the table. `given` lists `(element, in_set)`
/// pairs, 0-based; an empty list gives the marginal.
pub fn exact_query(t: &ExactTable, target: usize, given: &[(usize, bool)]) -> Result<f64> {
    if target >= t.n {
        return Err(Error::InvalidInput(format!("element {} out of range 1..={}", target + 1, t.n)));
    }
    if let Some(&(e, _)) = given.iter().find(|(e, _)| *e >= t.n) {
        return Err(Error::InvalidInput(format!("element {} out of range 1..={}", e + 1, t.n)));
    }
    let (mut event, mut joint) = (0.0, 0.0);
    for (s, &p) in t.states.iter().zip(&t.probs) {
        if given.iter().all(|&(e, inside)| s.contains(e) == inside) {
            event += p;
            if s.contains(target) {
                joint += p;
            }
        }
    }
    if event <= 0.0 {
        return Err(Error::ZeroProbabilityEvent);
    }
    Ok((joint / event).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DppModel, IsingChainModel, ModularModel};

    fn one(n: usize, l: &[usize]) -> Subset {
        Subset::from_one_based(n, l).unwrap()
    }

    #[test]
    fn uniform_over_partition_bases() {
        let m = ModularModel::new(vec![0.3, 0.1, 2.0, -1.0], 0.0).unwrap();
        let c = ConstraintFamily::partition_base(&[1, 1, 2, 2]).unwrap();
        let t = enumerate_distribution(&m, &c).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.probs.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        assert!((exact_query(&t, 0, &[]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(exact_query(&t, 0, &[(1, true)]).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_dpp_table() {
        let m = DppModel::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]], 1.0).unwrap();
        let t = enumerate_distribution(&m, &ConstraintFamily::unconstrained(2).unwrap()).unwrap();
        assert_eq!(t.states, vec![one(2, &[]), one(2, &[1]), one(2, &[2]), one(2, &[1, 2])]);
        for (p, e) in t.probs.iter().zip([1.0, 1.0, 2.0, 2.0]) {
            assert!((p - e / 6.0).abs() < 1e-15);
        }
        assert!((t.log_z_total - 6f64.ln()).abs() < 1e-14);
        assert!((exact_query(&t, 1, &[]).unwrap() - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(t.to_csv().lines().next(), Some("subset,prob,log_score"));
        assert_eq!(t.to_csv().lines().nth(4).unwrap().split(',').next(), Some("1;2"));
    }

    #[test]
    fn full_base_is_a_point_mass() {
        let m = ModularModel::constant(5).unwrap();
        let t = enumerate_distribution(&m, &ConstraintFamily::uniform_base(5, 5).unwrap()).unwrap();
        assert_eq!(t.probs, vec![1.0]);
    }

    #[test]
    fn ordering_is_size_then_lexicographic() {
        let m = ModularModel::constant(4).unwrap();
        let t = enumerate_distribution(&m, &ConstraintFamily::uniform_rank(4, 2).unwrap()).unwrap();
        let labels: Vec<String> = t.states.iter().map(|s| s.to_string()).collect();
        assert_eq!(labels, ["", "1", "2", "3", "4", "1;2", "1;3", "1;4", "2;3", "2;4", "3;4"]);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let m = IsingChainModel::with_random_weights(12, 3, 0.6, 1.5).unwrap();
        let t = enumerate_distribution(&m, &ConstraintFamily::uniform_rank(12, 5).unwrap()).unwrap();
        let sum: f64 = t.probs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(t.log_z_total >= t.log_z_constrained);
    }

    #[test]
    fn guards_and_query_errors() {
        let m = ModularModel::constant(21).unwrap();
        assert!(matches!(
            enumerate_distribution(&m, &ConstraintFamily::unconstrained(21).unwrap()),
            Err(Error::TooLarge { .. })
        ));
        let m = ModularModel::constant(3).unwrap();
        let t = enumerate_distribution(&m, &ConstraintFamily::uniform_base(3, 1).unwrap()).unwrap();
        assert!(matches!(exact_query(&t, 0, &[(1, true), (2, true)]), Err(Error::ZeroProbabilityEvent)));
        assert!(exact_query(&t, 3, &[]).is_err());
    }

    #[test]
    fn conditional_matches_bayes() {
        let m = DppModel::from_spectrum(&[3.0, 1.0, 0.2, 0.7, 1.5, 2.2], 11, 1.0).unwrap();
        let t = enumerate_distribution(&m, &ConstraintFamily::unconstrained(6).unwrap()).unwrap();
        let joint: f64 = t.states.iter().zip(&t.probs).filter(|(s, _)| s.contains(0) && s.contains(3)).map(|(_, p)| p).sum();
        let p3 = exact_query(&t, 3, &[]).unwrap();
        assert!((exact_query(&t, 0, &[(3, true)]).unwrap() - joint / p3).abs() < 1e-12);
    }
}
