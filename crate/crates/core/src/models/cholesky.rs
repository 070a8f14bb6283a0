//! Cholesky log-determinants of principal submatrices, from scratch and with
//! rank-one updates.

use nalgebra::DMatrix;

/// Pivots at or below this value are treated as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// `log det K[idx, idx]`, or `-inf` when the factorization meets a pivot at
/// or below [`PIVOT_TOLERANCE`]. The empty submatrix has log det 0.
pub fn log_det_principal(kernel: &DMatrix<f64>, idx: &[usize]) -> f64 {
    let k = idx.len();
    if k == 0 {
        return 0.0;
    }
    let mut a = vec![0.0; k * k];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate().take(r + 1) {
            a[r * k + c] = kernel[(i, j)];
        }
    }
    let mut log_det = 0.0;
    for j in 0..k {
        let mut d = a[j * k + j];
        for p in 0..j {
            d -= a[j * k + p] * a[j * k + p];
        }
        if d.is_nan() || d <= PIVOT_TOLERANCE {
            return f64::NEG_INFINITY;
        }
        let ljj = d.sqrt();
        a[j * k + j] = ljj;
        log_det += d.ln();
        for i in (j + 1)..k {
            let mut v = a[i * k + j];
            for p in 0..j {
                v -= a[i * k + p] * a[j * k + p];
            }
            a[i * k + j] = v / ljj;
        }
    }
    log_det
}

/// A Cholesky factor of `K[S, S]` maintained under single-element additions
/// and removals.
///
/// Rows are stored with stride `n`, so the factor never reallocates.
#[derive(Debug, Clone)]
pub struct IncrementalLogDet {
    n: usize,
    members: Vec<usize>,
    factor: Vec<f64>,
    log_det: f64,
    scratch: Vec<f64>,
    scratch_vec: Vec<f64>,
}

impl IncrementalLogDet {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            members: Vec::with_capacity(n),
            factor: vec![0.0; n * n],
            log_det: 0.0,
            scratch: vec![0.0; n * n],
            scratch_vec: vec![0.0; n],
        }
    }

    /// Rebuilds the factor for `members` (in the given order).
    /// Returns false, leaving the factor empty, if the submatrix is singular.
    pub fn reset(&mut self, kernel: &DMatrix<f64>, members: &[usize]) -> bool {
        self.members.clear();
        self.log_det = 0.0;
        for &m in members {
            if !self.push(kernel, m) {
                self.members.clear();
                self.log_det = 0.0;
                return false;
            }
        }
        true
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    fn position(&self, element: usize) -> usize {
        self.members
            .iter()
            .position(|&m| m == element)
            .unwrap_or_else(|| panic!("element {element} not in factor"))
    }

    /// Solves `L y = K[S, t]` into `out[..k]` and returns the new pivot.
    fn bordered_pivot(factor: &[f64], n: usize, members: &[usize], kernel: &DMatrix<f64>, t: usize, out: &mut [f64]) -> f64 {
        let k = members.len();
        let mut d = kernel[(t, t)];
        for r in 0..k {
            let mut v = kernel[(members[r], t)];
            let row = &factor[r * n..r * n + r];
            for (p, &lrp) in row.iter().enumerate() {
                v -= lrp * out[p];
            }
            let y = v / factor[r * n + r];
            out[r] = y;
            d -= y * y;
        }
        d
    }

    /// `log det K[S ∪ {t}]` without changing the factor.
    pub fn log_det_with(&mut self, kernel: &DMatrix<f64>, t: usize) -> f64 {
        let d = Self::bordered_pivot(&self.factor, self.n, &self.members, kernel, t, &mut self.scratch_vec);
        if d.is_nan() || d <= PIVOT_TOLERANCE {
            f64::NEG_INFINITY
        } else {
            self.log_det + d.ln()
        }
    }

    /// Appends `t`. Returns false, leaving the factor unchanged, when the
    /// enlarged submatrix is singular.
    pub fn push(&mut self, kernel: &DMatrix<f64>, t: usize) -> bool {
        let k = self.members.len();
        let n = self.n;
        let d = Self::bordered_pivot(&self.factor, n, &self.members, kernel, t, &mut self.scratch_vec);
        if d.is_nan() || d <= PIVOT_TOLERANCE {
            return false;
        }
        self.factor[k * n..k * n + k].copy_from_slice(&self.scratch_vec[..k]);
        self.factor[k * n + k] = d.sqrt();
        self.members.push(t);
        self.log_det += d.ln();
        true
    }

    /// Removes row/column `p` from a `k × k` factor stored in `f` (stride
    /// `n`), updating the trailing block in place. Returns the change in
    /// log det.
    fn downdate(f: &mut [f64], n: usize, k: usize, p: usize, x: &mut [f64]) -> f64 {
        let mut delta = -2.0 * f[p * n + p].ln();
        let m = k - p - 1;
        for (i, xi) in x.iter_mut().enumerate().take(m) {
            *xi = f[(p + 1 + i) * n + p];
        }
        // shift rows below p up by one and drop column p
        for r in (p + 1)..k {
            for c in 0..r {
                let src = if c < p { f[r * n + c] } else { f[r * n + c + 1] };
                f[(r - 1) * n + c] = src;
            }
            let diag = f[r * n + r];
            f[(r - 1) * n + (r - 1)] = diag;
        }
        // rank-one update of the trailing block with x
        for j in 0..m {
            let row = p + j;
            let ljj = f[row * n + row];
            let r = ljj.hypot(x[j]);
            let c = r / ljj;
            let s = x[j] / ljj;
            f[row * n + row] = r;
            delta += 2.0 * (r / ljj).ln();
            for (i, xi) in x.iter_mut().enumerate().take(m).skip(j + 1) {
                let ri = p + i;
                let lij = (f[ri * n + row] + s * *xi) / c;
                f[ri * n + row] = lij;
                *xi = c * *xi - s * lij;
            }
        }
        delta
    }

    /// `log det K[S ∖ {s}]` without changing the factor.
    pub fn log_det_without(&mut self, s: usize) -> f64 {
        let k = self.members.len();
        let p = self.position(s);
        let n = self.n;
        self.scratch[..k * n].copy_from_slice(&self.factor[..k * n]);
        self.log_det + Self::downdate(&mut self.scratch, n, k, p, &mut self.scratch_vec)
    }

    /// `log det K[S ∖ {out} ∪ {into}]` without changing the factor.
    pub fn log_det_exchange(&mut self, kernel: &DMatrix<f64>, out: usize, into: usize) -> f64 {
        let k = self.members.len();
        let p = self.position(out);
        let n = self.n;
        self.scratch[..k * n].copy_from_slice(&self.factor[..k * n]);
        let removed = self.log_det + Self::downdate(&mut self.scratch, n, k, p, &mut self.scratch_vec);
        let mut rest: Vec<usize> = Vec::with_capacity(k);
        rest.extend(self.members.iter().copied().filter(|&m| m != out));
        let d = Self::bordered_pivot(&self.scratch, n, &rest, kernel, into, &mut self.scratch_vec);
        if d.is_nan() || d <= PIVOT_TOLERANCE {
            f64::NEG_INFINITY
        } else {
            removed + d.ln()
        }
    }

    /// Removes `s` from the factor.
    pub fn remove(&mut self, s: usize) {
        let k = self.members.len();
        let p = self.position(s);
        let n = self.n;
        self.log_det += Self::downdate(&mut self.factor, n, k, p, &mut self.scratch_vec);
        self.members.remove(p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_psd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &b * b.transpose() + DMatrix::identity(n, n) * 0.1
    }

    fn reference(kernel: &DMatrix<f64>, idx: &[usize]) -> f64 {
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| kernel[(idx[r], idx[c])]);
        sub.determinant().ln()
    }

    #[test]
    fn diagonal_log_det() {
        let k = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
        assert!((log_det_principal(&k, &[0, 1]) - 6f64.ln()).abs() < 1e-14);
        assert_eq!(log_det_principal(&k, &[]), 0.0);
    }

    #[test]
    fn singular_gives_neg_inf() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(log_det_principal(&k, &[0, 1]), f64::NEG_INFINITY);
        assert_eq!(log_det_principal(&k, &[1]), 0.0);
    }

    #[test]
    fn matches_lu_determinant() {
        let k = random_psd(7, 3);
        for idx in [vec![0], vec![1, 4], vec![0, 2, 3, 6], (0..7).collect::<Vec<_>>()] {
            assert!((log_det_principal(&k, &idx) - reference(&k, &idx)).abs() < 1e-9);
        }
    }

    #[test]
    fn incremental_tracks_recompute() {
        let n = 12;
        let k = random_psd(n, 5);
        let mut inc = IncrementalLogDet::new(n);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut set: Vec<usize> = Vec::new();
        for _ in 0..2000 {
            let u = rng.random_range(0..n);
            if set.contains(&u) {
                if rng.random_bool(0.5) {
                    let predicted = inc.log_det_without(u);
                    inc.remove(u);
                    set.retain(|&x| x != u);
                    assert!((predicted - inc.log_det()).abs() < 1e-12);
                } else if let Some(v) = (0..n).find(|x| !set.contains(x)) {
                    let predicted = inc.log_det_exchange(&k, u, v);
                    inc.remove(u);
                    assert!(inc.push(&k, v));
                    set.retain(|&x| x != u);
                    set.push(v);
                    assert!((predicted - inc.log_det()).abs() < 1e-9);
                }
            } else {
                let predicted = inc.log_det_with(&k, u);
                assert!(inc.push(&k, u));
                set.push(u);
                assert!((predicted - inc.log_det()).abs() < 1e-12);
            }
            let mut sorted = set.clone();
            sorted.sort();
            assert!((inc.log_det() - log_det_principal(&k, &sorted)).abs() < 1e-8);
        }
    }
}
