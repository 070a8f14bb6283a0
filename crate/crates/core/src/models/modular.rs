//! Modular models: `F(S) = Σ_{i ∈ S} w_i`.

use crate::error::{Error, Result};
use crate::model::{LogWeight, SetModel};
use crate::subset::{GroundSet, Subset};

#[derive(Debug, Clone)]
pub struct ModularModel {
    weights: Vec<f64>,
    beta: f64,
}

impl ModularModel {
    pub fn new(weights: Vec<f64>, beta: f64) -> Result<Self> {
        GroundSet::new(weights.len())?;
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("modular weights must be finite".into()));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be finite and nonnegative, got {beta}")));
        }
        Ok(Self { weights, beta })
    }

    /// Constant `F`: every subset gets the same weight.
    pub fn constant(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n], 1.0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetModel for ModularModel {
    fn ground(&self) -> GroundSet {
        GroundSet::new(self.weights.len()).expect("validated at construction")
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn log_unnormalized(&self, s: &Subset) -> LogWeight {
        LogWeight::new(self.beta * s.iter().map(|i| self.weights[i]).sum::<f64>())
    }

    fn describe(&self) -> String {
        format!("modular(n={}, beta={})", self.weights.len(), self.beta)
    }
}
