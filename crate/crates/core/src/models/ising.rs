//! Chain-structured Ising model with a cardinality term:
//! `F(S) = δ Σ_{i<N} w_i (s_i ⊕ s_{i+1}) + (1 − δ)|S|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{LogWeight, SetModel};
use crate::subset::{GroundSet, Subset};

#[derive(Debug, Clone)]
pub struct IsingChainModel {
    n: usize,
    weights: Vec<f64>,
    delta: f64,
    beta: f64,
}

impl IsingChainModel {
    /// `weights` holds the `n − 1` couplings between consecutive elements.
    pub fn new(n: usize, weights: Vec<f64>, delta: f64, beta: f64) -> Result<Self> {
        GroundSet::new(n)?;
        if weights.len() != n - 1 {
            return Err(Error::InvalidInput(format!(
                "chain Ising on {n} elements needs {} weights, got {}",
                n - 1,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("Ising weights must be finite".into()));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidInput(format!("delta must lie in [0, 1], got {delta}")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be finite and nonnegative, got {beta}")));
        }
        Ok(Self { n, weights, delta, beta })
    }

    /// Couplings drawn uniformly from `[0, 1)` with a ChaCha8 stream seeded
    /// by `seed`.
    pub fn with_random_weights(n: usize, seed: u64, delta: f64, beta: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..n.saturating_sub(1)).map(|_| rng.random::<f64>()).collect();
        Self::new(n, weights, delta, beta)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The set function `F(S)` (no β).
    pub fn set_function(&self, s: &Subset) -> f64 {
        let mut boundary = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            if s.contains(i) != s.contains(i + 1) {
                boundary += w;
            }
        }
        self.delta * boundary + (1.0 - self.delta) * s.len() as f64
    }
}

impl SetModel for IsingChainModel {
    fn ground(&self) -> GroundSet {
        GroundSet::new(self.n).expect("validated at construction")
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn log_unnormalized(&self, s: &Subset) -> LogWeight {
        LogWeight::new(self.beta * self.set_function(s))
    }

    fn describe(&self) -> String {
        format!("ising_chain(n={}, beta={}, delta={})", self.n, self.beta, self.delta)
    }
}
