use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};

/// Seeded Gaussian perturbation `η = δρ` with `‖η‖₂ = p‖b†‖₂`.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    pub rho: DVector<f64>,
    pub delta: f64,
    pub eta: DVector<f64>,
    pub achieved_level: f64,
    pub seed: u64,
}

impl NoiseRealization {
    /// Draws `ρ ~ N(0, I)` from ChaCha8 seeded with `seed`, then sets
    /// `δ = p‖b†‖₂/‖ρ‖₂`.
    pub fn generate(clean: &DVector<f64>, level: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&level) {
            return Err(invalid(format!("noise level must lie in [0, 1), got {level}")));
        }
        let scale = clean.norm();
        if !(scale > 0.0) {
            return Err(invalid("noise level is relative to the data, which is zero"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho: DVector<f64> = DVector::from_fn(clean.len(), |_, _| StandardNormal.sample(&mut rng));
        let delta = level * scale / rho.norm();
        let eta = &rho * delta;
        let achieved_level = eta.norm() / scale;
        Ok(NoiseRealization {
            rho,
            delta,
            eta,
            achieved_level,
            seed,
        })
    }
}

/// Seed for the `index`-th noise level of a run seeded with `base`.
pub fn level_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}
