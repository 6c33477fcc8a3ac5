//! Zipf file popularity and the one-parameter family `b_n(θ) ∝ n^{-θ}` that
//! deforms the uniform distribution (θ = 0) into the target Zipf law.

use crate::error::{Error, Result};
use crate::specfun::sum::compensated_sum;

/// Normalised, non-increasing request probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityVector {
    probs: Vec<f64>,
}

impl PopularityVector {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Arbitrary weights (used by tests and sensitivity studies); normalised.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Domain("popularity weights must be positive and finite".into()));
        }
        let total = compensated_sum(weights.iter().copied());
        Ok(PopularityVector {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }
}

impl std::ops::Index<usize> for PopularityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

fn power_law(n_files: usize, exponent: f64) -> Vec<f64> {
    let weights: Vec<f64> = (1..=n_files).map(|n| (n as f64).powf(-exponent)).collect();
    let total = compensated_sum(weights.iter().copied());
    weights.into_iter().map(|w| w / total).collect()
}

/// `f_n = n^{-τ} / Σ_m m^{-τ}`
pub fn zipf(n_files: usize, skew: f64) -> Result<PopularityVector> {
    if n_files == 0 {
        return Err(Error::Domain("library must hold at least one file".into()));
    }
    if !(skew >= 0.0) || !skew.is_finite() {
        return Err(Error::Domain(format!("Zipf skew must be finite and non-negative, got {skew}")));
    }
    Ok(PopularityVector {
        probs: power_law(n_files, skew),
    })
}

/// `b_n(θ)` for θ ∈ [0, τ].
pub fn homotopy_popularity(n_files: usize, theta: f64, skew: f64) -> Result<PopularityVector> {
    if !(0.0..=skew).contains(&theta) {
        return Err(Error::Domain(format!("θ = {theta} outside [0, {skew}]")));
    }
    zipf(n_files, theta)
}

/// `ḃ_n(θ) = b_n(θ) (Σ_m b_m(θ) ln m − ln n)`; the entries sum to zero.
pub fn homotopy_popularity_derivative(n_files: usize, theta: f64) -> Result<Vec<f64>> {
    let b = zipf(n_files, theta.max(0.0))?;
    let mean_log = compensated_sum(b.probs.iter().enumerate().map(|(i, bi)| bi * ((i + 1) as f64).ln()));
    Ok(b
        .probs
        .iter()
        .enumerate()
        .map(|(i, bi)| bi * (mean_log - ((i + 1) as f64).ln()))
        .collect())
}
