use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{gibbs_probability, LogWeight, SetModel};
use crate::subset::Subset;

/// Largest ground set [`alpha_coupling`] accepts.
pub const MAX_COUPLING_N: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingReport {
    pub n: usize,
    pub k: usize,
    /// Largest sensitivity over containment edges `S = T ∪ {t}`.
    pub alpha_1_max: f64,
    /// Largest sensitivity over same-size edges `S = R ∪ {s}`, `T = R ∪ {t}`.
    pub alpha_2_max: f64,
    pub alpha: f64,
    pub containment_edges: usize,
    pub same_size_edges: usize,
}

impl CouplingReport {
    /// `2N ln(N/ε) / (1 − α)`, or an error when `α ≥ 1`.
    pub fn contraction_bound(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidInput(format!("eps must lie in (0, 1), got {eps}")));
        }
        if self.alpha >= 1.0 {
            return Err(Error::BoundInapplicable(format!("alpha = {} is not below 1", self.alpha)));
        }
        let n = self.n as f64;
        Ok(2.0 * n * (n / eps).ln() / (1.0 - self.alpha))
    }

    pub fn to_kv(&self, eps: f64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "k = {}", self.k);
        let _ = writeln!(out, "alpha_1_max = {}", self.alpha_1_max);
        let _ = writeln!(out, "alpha_2_max = {}", self.alpha_2_max);
        let _ = writeln!(out, "alpha = {}", self.alpha);
        let _ = writeln!(out, "containment_edges = {}", self.containment_edges);
        let _ = writeln!(out, "same_size_edges = {}", self.same_size_edges);
        let _ = writeln!(out, "eps = {eps}");
        match self.contraction_bound(eps) {
            Ok(b) => {
                let _ = writeln!(out, "contraction_bound = {b}");
            }
            Err(_) => out.push_str("contraction_bound = inapplicable\n"),
        }
        out
    }
}

struct Gibbs<'a> {
    log_pi: &'a [LogWeight],
    k: usize,
}

impl Gibbs<'_> {
    fn plus(&self, s: usize, i: usize) -> f64 {
        if s >> i & 1 == 1 || (s.count_ones() as usize) >= self.k {
            return 0.0;
        }
        gibbs_probability(self.log_pi[s], self.log_pi[s | 1 << i])
    }

    fn minus(&self, s: usize, i: usize) -> f64 {
        debug_assert!(s >> i & 1 == 1);
        gibbs_probability(self.log_pi[s], self.log_pi[s & !(1 << i)])
    }

    fn live(&self, s: usize) -> bool {
        !self.log_pi[s].is_zero_prob()
    }
}

/// Path-coupling sensitivities of the add/delete chain on `|S| ≤ k`.
///
/// Edges are pairs at distance one with both endpoints of positive
/// probability.
pub fn alpha_coupling<M: SetModel + ?Sized>(m: &M, k: usize) -> Result<CouplingReport> {
    let n = m.ground().len();
    if n > MAX_COUPLING_N {
        return Err(Error::TooLarge { what: "ground set for coupling enumeration", actual: n, limit: MAX_COUPLING_N });
    }
    if k > n {
        return Err(Error::InvalidInput(format!("rank {k} exceeds ground set size {n}")));
    }
    let log_pi: Vec<LogWeight> =
        (0..1usize << n).into_par_iter().map(|mask| m.log_unnormalized(&Subset::from_mask(n, mask as u64))).collect();
    let g = Gibbs { log_pi: &log_pi, k };
    let full = (1usize << n) - 1;

    // per set S: containment edges (S, S∖t) and same-size edges (R∪s, R∪t) with s < t taken from R = S∖s
    let per_set: Vec<(f64, f64, usize, usize)> = (0..1usize << n)
        .into_par_iter()
        .filter(|&s| (s.count_ones() as usize) <= k && g.live(s))
        .map(|s| {
            let (mut a1, mut a2, mut e1, mut e2) = (0.0f64, 0.0f64, 0usize, 0usize);
            let size = s.count_ones() as usize;
            let room = size < k;
            for t in (0..n).filter(|&t| s >> t & 1 == 1) {
                let tt = s & !(1 << t);
                if g.live(tt) {
                    e1 += 1;
                    let mut v = 0.0;
                    for i in (0..n).filter(|&i| tt >> i & 1 == 1) {
                        v += (g.minus(tt, i) - g.minus(s, i)).max(0.0);
                    }
                    if room {
                        for i in (0..n).filter(|&i| s >> i & 1 == 0) {
                            v += (g.plus(s, i) - g.plus(tt, i)).max(0.0);
                        }
                    }
                    a1 = a1.max(v);
                }
                // same-size partner T = R ∪ {u}, u > t, with R = S ∖ {t}
                let r = tt;
                for u in ((t + 1)..n).filter(|&u| s >> u & 1 == 0) {
                    let other = r | 1 << u;
                    if !g.live(other) {
                        continue;
                    }
                    e2 += 1;
                    let mut keep = g.minus(s, t).min(g.minus(other, u));
                    for i in (0..n).filter(|&i| r >> i & 1 == 1) {
                        keep -= (g.minus(s, i) - g.minus(other, i)).abs();
                    }
                    if room {
                        let mut add = g.plus(s, u).min(g.plus(other, t));
                        let union = s | other;
                        for i in (0..n).filter(|&i| (full & !union) >> i & 1 == 1) {
                            add -= (g.plus(s, i) - g.plus(other, i)).abs();
                        }
                        keep += add;
                    }
                    a2 = a2.max(1.0 - keep);
                }
            }
            (a1, a2, e1, e2)
        })
        .collect();

    let mut report =
        CouplingReport { n, k, alpha_1_max: 0.0, alpha_2_max: 0.0, alpha: 0.0, containment_edges: 0, same_size_edges: 0 };
    for (a1, a2, e1, e2) in per_set {
        report.alpha_1_max = report.alpha_1_max.max(a1);
        report.alpha_2_max = report.alpha_2_max.max(a2);
        report.containment_edges += e1;
        report.same_size_edges += e2;
    }
    report.alpha = report.alpha_1_max.max(report.alpha_2_max);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DppModel, ModularModel};

    #[test]
    fn constant_f_is_one_half() {
        for (n, k) in [(4, 2), (6, 3), (7, 1)] {
            let r = alpha_coupling(&ModularModel::constant(n).unwrap(), k).unwrap();
            assert_eq!(r.alpha_1_max, 0.0);
            assert_eq!(r.alpha_2_max, 0.5);
            assert_eq!(r.alpha, 0.5);
        }
    }

    #[test]
    fn full_rank_constant_f_contracts() {
        let r = alpha_coupling(&ModularModel::constant(5).unwrap(), 5).unwrap();
        assert_eq!(r.alpha, 0.0);
        let b = r.contraction_bound(0.1).unwrap();
        assert!((b - 10.0 * 50f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn extreme_weight_does_not_contract() {
        let mut w = vec![0.0; 5];
        w[0] = 100.0;
        let r = alpha_coupling(&ModularModel::new(w, 1.0).unwrap(), 3).unwrap();
        assert!(r.alpha >= 1.0);
        assert!(matches!(r.contraction_bound(0.01), Err(Error::BoundInapplicable(_))));
        assert!(r.to_kv(0.01).contains("inapplicable"));
    }

    #[test]
    fn edge_counts() {
        // containment: Σ_{|S| ≤ k, S ≠ ∅} |S|; same-size: Σ_{|R| < k} C(N−|R|, 2) C(N, |R|)
        let (n, k) = (6usize, 3usize);
        let r = alpha_coupling(&ModularModel::constant(n).unwrap(), k).unwrap();
        let binom = |a: usize, b: usize| (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1));
        let containment: usize = (1..=k).map(|s| s * binom(n, s)).sum();
        let same: usize = (0..k).map(|r| binom(n, r) * binom(n - r, 2)).sum();
        assert_eq!(r.containment_edges, containment);
        assert_eq!(r.same_size_edges, same);
    }

    #[test]
    fn components_are_nonnegative_on_dpps() {
        let m = DppModel::from_spectrum(&[0.5, 1.0, 2.0, 0.1, 0.7, 1.3, 0.2], 5, 1.0).unwrap();
        let r = alpha_coupling(&m, 4).unwrap();
        assert!(r.alpha_1_max >= 0.0 && r.alpha_2_max >= 0.0);
        assert!(alpha_coupling(&ModularModel::constant(15).unwrap(), 3).is_err());
    }
}
