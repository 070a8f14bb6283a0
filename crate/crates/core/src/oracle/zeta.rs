use rayon::prelude::*;

use super::table::feasible_states;
use crate::constraints::ConstraintFamily;
use crate::error::{Error, Result};
use crate::model::SetModel;
use crate::subset::Subset;

/// Largest ground set [`zeta_f`] accepts.
pub const MAX_ZETA_N: usize = 16;

/// `max |F(S) + F(T) − F(S∩T) − F(S∪T)|` over feasible pairs `S, T`, with
/// `F = log π / β`.
///
/// Returns 0 with a warning when β = 0. Infinite when some term involves a
/// zero-probability subset.
pub fn zeta_f<M: SetModel + ?Sized>(m: &M, c: &ConstraintFamily) -> Result<f64> {
    let n = c.n();
    if n > MAX_ZETA_N {
        return Err(Error::TooLarge { what: "ground set for pairwise enumeration", actual: n, limit: MAX_ZETA_N });
    }
    let beta = m.beta();
    if beta == 0.0 {
        log::warn!("beta is 0; reporting the deviation of the zero function");
        return Ok(0.0);
    }
    let f: Vec<f64> = (0..1u64 << n)
        .into_par_iter()
        .map(|mask| m.log_unnormalized(&Subset::from_mask(n, mask)).value() / beta)
        .collect();
    let masks: Vec<usize> = feasible_states(c)?.iter().map(|s| s.to_mask() as usize).collect();
    let deviation = |a: usize, b: usize| {
        let v = f[a] + f[b] - f[a & b] - f[a | b];
        if v.is_nan() {
            f64::INFINITY
        } else {
            v.abs()
        }
    };
    let zeta = (0..masks.len())
        .into_par_iter()
        .map(|i| masks[i + 1..].iter().map(|&b| deviation(masks[i], b)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    if zeta.is_infinite() {
        log::warn!("a zero-probability subset makes the deviation unbounded");
    }
    Ok(zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DppModel, IsingChainModel, ModularModel};

    #[test]
    fn modular_and_diagonal_are_zero() {
        let m = ModularModel::new(vec![0.5, -2.0, 1.0, 3.0, 0.0], 2.0).unwrap();
        assert_eq!(zeta_f(&m, &ConstraintFamily::unconstrained(5).unwrap()).unwrap(), 0.0);
        let d = DppModel::from_rows(
            &[vec![2.0, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 4.0]],
            1.0,
        )
        .unwrap();
        assert!(zeta_f(&d, &ConstraintFamily::unconstrained(3).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn ising_path_cut() {
        // S = {1,3}, T = {2}: 2 + 2 − 0 − 0 = 4
        let m = IsingChainModel::new(3, vec![1.0, 1.0], 1.0, 1.0).unwrap();
        assert_eq!(zeta_f(&m, &ConstraintFamily::unconstrained(3).unwrap()).unwrap(), 4.0);
    }

    #[test]
    fn reports_f_not_beta_f() {
        let a = IsingChainModel::new(6, vec![0.3, 1.2, 0.4, 0.9, 0.1], 0.7, 1.0).unwrap();
        let b = IsingChainModel::new(6, vec![0.3, 1.2, 0.4, 0.9, 0.1], 0.7, 3.5).unwrap();
        let c = ConstraintFamily::uniform_rank(6, 4).unwrap();
        let (za, zb) = (zeta_f(&a, &c).unwrap(), zeta_f(&b, &c).unwrap());
        assert!(za > 0.0);
        assert!((za - zb).abs() < 1e-12);
    }

    #[test]
    fn zero_beta_and_guard() {
        let m = ModularModel::new(vec![1.0; 4], 0.0).unwrap();
        assert_eq!(zeta_f(&m, &ConstraintFamily::unconstrained(4).unwrap()).unwrap(), 0.0);
        let big = ModularModel::constant(17).unwrap();
        assert!(zeta_f(&big, &ConstraintFamily::unconstrained(17).unwrap()).is_err());
    }
}
