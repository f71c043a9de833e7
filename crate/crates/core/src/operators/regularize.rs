use nalgebra::{DMatrix, DVector};

use super::svd::SvdFactors;
use crate::error::{invalid, Result};

/// Tikhonov surrogate `S_β = V (Σ² + βI)⁻¹ Σ Uᵀ ≈ A†`.
#[derive(Debug, Clone)]
pub struct TikhonovSmoother {
    beta: f64,
    matrix: DMatrix<f64>,
}

impl TikhonovSmoother {
    pub fn new(svd: &SvdFactors, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(invalid(format!("beta must be positive, got {beta}")));
        }
        let mut v = svd.v.clone();
        for (j, &s) in svd.sigma.iter().enumerate() {
            v.column_mut(j).scale_mut(s / (s * s + beta));
        }
        Ok(TikhonovSmoother {
            beta,
            matrix: v * svd.u.transpose(),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Dense `n × m` matrix of `S_β`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.matrix.ncols() {
            return Err(invalid("vector length does not match S_beta"));
        }
        Ok(&self.matrix * y)
    }
}

/// Smallest `k ≥ 1` whose truncated-SVD data residual `‖A_k A_k† b − b‖`
/// drops below `threshold_factor · noise_norm`; the numerical rank if none does.
pub fn morozov_truncation(
    svd: &SvdFactors,
    b: &DVector<f64>,
    noise_norm: f64,
    threshold_factor: f64,
) -> Result<usize> {
    if b.len() != svd.nrows() {
        return Err(invalid("data length does not match the operator"));
    }
    if !(noise_norm >= 0.0) || !(threshold_factor >= 1.0) {
        return Err(invalid("noise norm must be >= 0 and threshold factor >= 1"));
    }
    let rank = svd.rank();
    let threshold = threshold_factor * noise_norm;
    let coeffs = svd.u.tr_mul(b);
    let mut fitted = DVector::zeros(b.len());
    for k in 1..=rank {
        fitted.axpy(coeffs[k - 1], &svd.u.column(k - 1), 1.0);
        if (b - &fitted).norm() <= threshold {
            return Ok(k);
        }
    }
    Ok(rank.max(1))
}

/// Data residual `‖A_k A_k† b − b‖` for every `k = 1..=rank`.
pub fn truncation_residuals(svd: &SvdFactors, b: &DVector<f64>) -> Vec<f64> {
    let coeffs = svd.u.tr_mul(b);
    let mut fitted = DVector::zeros(b.len());
    (1..=svd.rank())
        .map(|k| {
            fitted.axpy(coeffs[k - 1], &svd.u.column(k - 1), 1.0);
            (b - &fitted).norm()
        })
        .collect()
}
