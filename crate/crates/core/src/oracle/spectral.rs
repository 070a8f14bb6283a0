use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use super::table::ExactTable;
use crate::error::{Error, Result};
use crate::subset::Subset;

/// Largest tolerated `|π(S)P(S,T) − π(T)P(T,S)|`.
pub const REVERSIBILITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Eigenvalues in decreasing order, over positive-probability states.
    pub eigenvalues: Vec<f64>,
    pub lambda_2: f64,
    pub lambda_min: f64,
    /// `max{λ₂, |λ_min|}`.
    pub lambda_max_abs: f64,
    pub x0: Subset,
    pub pi_x0: f64,
    pub eps: f64,
    /// `(1 − λ_max)⁻¹ (ln π(X₀)⁻¹ + ln ε⁻¹)`; infinite for a chain that does
    /// not mix.
    pub relaxation_bound: f64,
}

impl SpectralReport {
    pub fn mixes(&self) -> bool {
        self.relaxation_bound.is_finite()
    }

    /// The bound at another starting state probability and accuracy.
    pub fn bound_at(&self, pi_x0: f64, eps: f64) -> f64 {
        relaxation_bound(self.lambda_max_abs, pi_x0, eps)
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "lambda_2 = {}", self.lambda_2);
        let _ = writeln!(out, "lambda_min = {}", self.lambda_min);
        let _ = writeln!(out, "lambda_max_abs = {}", self.lambda_max_abs);
        let _ = writeln!(out, "spectral_gap = {}", 1.0 - self.lambda_max_abs);
        let _ = writeln!(out, "x0 = {}", self.x0);
        let _ = writeln!(out, "pi_x0 = {}", self.pi_x0);
        let _ = writeln!(out, "eps = {}", self.eps);
        let _ = writeln!(out, "relaxation_bound = {}", self.relaxation_bound);
        let _ = writeln!(out, "mixes = {}", self.mixes());
        out
    }
}

fn relaxation_bound(lambda_max: f64, pi_x0: f64, eps: f64) -> f64 {
    let gap = 1.0 - lambda_max;
    if gap <= 1e-12 {
        return f64::INFINITY;
    }
    (-pi_x0.ln() - eps.ln()) / gap
}

/// Spectrum of a kernel reversible with respect to `t`, and the mixing
/// bound it implies from `x0`.
///
/// States with zero probability are dropped; the rest are symmetrized as
/// `D^{1/2} P D^{-1/2}` with `D = diag(π)`.
pub fn spectral_analysis(p: &DMatrix<f64>, t: &ExactTable, x0: &Subset, eps: f64) -> Result<SpectralReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 1), got {eps}")));
    }
    let size = t.len();
    if p.nrows() != size || p.ncols() != size {
        return Err(Error::InvalidInput(format!("{}x{} matrix for a table of {size} states", p.nrows(), p.ncols())));
    }
    let pi_x0 = t.prob(x0);
    if pi_x0 <= 0.0 {
        return Err(Error::InvalidInput(format!("starting state {x0:?} has zero probability")));
    }
    let pi = &t.probs;
    for i in 0..size {
        for j in (i + 1)..size {
            let r = (pi[i] * p[(i, j)] - pi[j] * p[(j, i)]).abs();
            if r > REVERSIBILITY_TOLERANCE {
                return Err(Error::NotReversible { residual: r, row: i, col: j });
            }
        }
    }
    let live: Vec<usize> = (0..size).filter(|&i| pi[i] > 0.0).collect();
    let m = live.len();
    let root: Vec<f64> = live.iter().map(|&i| pi[i].sqrt()).collect();
    let a = DMatrix::from_fn(m, m, |r, c| {
        let (i, j) = (live[r], live[c]);
        0.5 * (root[r] / root[c] * p[(i, j)] + root[c] / root[r] * p[(j, i)])
    });
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    if (eigenvalues[0] - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("leading eigenvalue {} is not 1; rows are not stochastic", eigenvalues[0])));
    }
    let (lambda_2, lambda_min) = if m == 1 { (0.0, 0.0) } else { (eigenvalues[1], eigenvalues[m - 1]) };
    let lambda_max_abs = lambda_2.max(lambda_min.abs());
    Ok(SpectralReport {
        eigenvalues,
        lambda_2,
        lambda_min,
        lambda_max_abs,
        x0: x0.clone(),
        pi_x0,
        eps,
        relaxation_bound: relaxation_bound(lambda_max_abs, pi_x0, eps),
    })
}

/// `½ Σ |p_i − q_i|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(format!("length mismatch: {} vs {}", p.len(), q.len())));
    }
    for (name, v) in [("p", p), ("q", q)] {
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("{name} sums to {s}, not 1")));
        }
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintFamily;
    use crate::models::ModularModel;
    use crate::oracle::{enumerate_distribution, transition_matrix};
    use crate::samplers::SamplerKind;

    fn two_state_table() -> ExactTable {
        let m = ModularModel::constant(2).unwrap();
        enumerate_distribution(&m, &ConstraintFamily::uniform_base(2, 1).unwrap()).unwrap()
    }

    #[test]
    fn two_state_closed_form() {
        let t = two_state_table();
        let p = DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
        let r = spectral_analysis(&p, &t, &t.states[0], 0.01).unwrap();
        assert!((r.lambda_2 - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.relaxation_bound - 1.5 * (2f64.ln() + 100f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn identity_does_not_mix() {
        let t = two_state_table();
        let r = spectral_analysis(&DMatrix::identity(2, 2), &t, &t.states[1], 0.1).unwrap();
        assert_eq!(r.lambda_max_abs, 1.0);
        assert!(!r.mixes());
        assert!(r.to_kv().contains("mixes = false"));
    }

    #[test]
    fn exchange_example_gap() {
        let m = ModularModel::new(vec![0.0, 2f64.ln()], 1.0).unwrap();
        let c = ConstraintFamily::uniform_base(2, 1).unwrap();
        let t = enumerate_distribution(&m, &c).unwrap();
        let p = transition_matrix(&m, &c, SamplerKind::Exchange).unwrap();
        let r = spectral_analysis(&p.matrix, &t, &t.states[0], 0.01).unwrap();
        assert!((r.lambda_2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_state_has_zero_second_eigenvalue() {
        let m = ModularModel::constant(3).unwrap();
        let t = enumerate_distribution(&m, &ConstraintFamily::uniform_base(3, 3).unwrap()).unwrap();
        let r = spectral_analysis(&DMatrix::identity(1, 1), &t, &t.states[0], 0.5).unwrap();
        assert_eq!(r.lambda_2, 0.0);
        assert!((r.relaxation_bound - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn irreversible_kernel_is_rejected() {
        let m = ModularModel::constant(3).unwrap();
        let t = enumerate_distribution(&m, &ConstraintFamily::uniform_base(3, 1).unwrap()).unwrap();
        let cycle = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(spectral_analysis(&cycle, &t, &t.states[0], 0.1), Err(Error::NotReversible { .. })));
        assert!(spectral_analysis(&DMatrix::identity(3, 3), &t, &t.states[0], 1.0).is_err());
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert!((tv_distance(&[0.6, 0.4], &[0.5, 0.5]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(tv_distance(&[1.0, 0.0, 0.0, 0.0], &[0.25; 4]).unwrap(), 0.75);
        assert!(tv_distance(&[1.0], &[0.5, 0.5]).is_err());
        assert!(tv_distance(&[0.7, 0.7], &[0.5, 0.5]).is_err());
    }
}
