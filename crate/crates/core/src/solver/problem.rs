use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};

/// Componentwise soft-thresholding `sign(v)·max(|v| − κ, 0)`.
pub fn shrink(v: f64, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(invalid(format!("shrinkage threshold must be >= 0, got {kappa}")));
    }
    Ok(shrink_unchecked(v, kappa))
}

/// Vector form of [`shrink`] with a per-entry threshold.
pub fn shrink_vec(v: &DVector<f64>, kappa: &DVector<f64>) -> Result<DVector<f64>> {
    if v.len() != kappa.len() {
        return Err(invalid("threshold vector length mismatch"));
    }
    if kappa.iter().any(|k| !(*k >= 0.0)) {
        return Err(invalid("shrinkage thresholds must be >= 0"));
    }
    Ok(v.zip_map(kappa, shrink_unchecked))
}

pub(crate) fn shrink_unchecked(v: f64, kappa: f64) -> f64 {
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        0.0
    }
}

/// `min_x ½‖Bx − c‖² + α‖Wx‖₁` with `W = diag(w)`.
#[derive(Debug, Clone)]
pub struct WeightedProblem {
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
    pub w: DVector<f64>,
    pub alpha: f64,
}

impl WeightedProblem {
    pub fn new(b: DMatrix<f64>, c: DVector<f64>, w: DVector<f64>, alpha: f64) -> Result<Self> {
        let p = WeightedProblem { b, c, w, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        validate_parts(&self.b, &self.c, &self.w, self.alpha)
    }

    pub fn dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        objective(&self.b, &self.c, &self.w, self.alpha, x)
    }

    /// Scale-free first-order optimality violation of `x`.
    pub fn kkt_violation(&self, x: &DVector<f64>) -> f64 {
        let grad = self.b.tr_mul(&(&self.b * x - &self.c));
        kkt_violation(&grad, &self.b.tr_mul(&self.c), &self.w, self.alpha, x)
    }
}

pub(crate) fn validate_parts(b: &DMatrix<f64>, c: &DVector<f64>, w: &DVector<f64>, alpha: f64) -> Result<()> {
    if b.nrows() != c.len() {
        return Err(invalid(format!(
            "fidelity operator has {} rows but data has length {}",
            b.nrows(),
            c.len()
        )));
    }
    if b.ncols() != w.len() {
        return Err(invalid(format!(
            "fidelity operator has {} columns but {} weights were given",
            b.ncols(),
            w.len()
        )));
    }
    if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(invalid("weights must be positive and finite"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    if c.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(invalid("problem data has non-finite entries"));
    }
    Ok(())
}

pub(crate) fn objective(b: &DMatrix<f64>, c: &DVector<f64>, w: &DVector<f64>, alpha: f64, x: &DVector<f64>) -> f64 {
    0.5 * (b * x - c).norm_squared() + alpha * w.dot(&x.abs())
}

/// `max_i` violation of `0 ∈ [Bᵀ(Bx−c)]_i + α w_i ∂|x_i|`, divided by
/// `‖Bᵀc‖_∞ + α max w`.
pub(crate) fn kkt_violation(
    grad: &DVector<f64>,
    btc: &DVector<f64>,
    w: &DVector<f64>,
    alpha: f64,
    x: &DVector<f64>,
) -> f64 {
    let scale = btc.amax() + alpha * w.max();
    let worst = (0..x.len())
        .map(|i| {
            let aw = alpha * w[i];
            if x[i] != 0.0 {
                (grad[i] + aw * x[i].signum()).abs()
            } else {
                (grad[i].abs() - aw).max(0.0)
            }
        })
        .fold(0.0, f64::max);
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Indices with `|x_i| > rel · max_j |x_j|`.
pub fn support(x: &DVector<f64>, rel: f64) -> Vec<usize> {
    let peak = x.amax();
    if peak == 0.0 {
        return Vec::new();
    }
    (0..x.len()).filter(|&i| x[i].abs() > rel * peak).collect()
}

/// Relative threshold used for reported supports.
pub const SUPPORT_REL_TOL: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrink_examples() {
        assert_eq!(shrink(3.0, 1.0).unwrap(), 2.0);
        assert_eq!(shrink(-0.5, 1.0).unwrap(), 0.0);
        assert_eq!(shrink(-3.0, 1.0).unwrap(), -2.0);
        assert_eq!(shrink(1.0, 1.0).unwrap(), 0.0);
        assert!(shrink(1.0, -0.1).is_err());
        let v = shrink_vec(&DVector::from_vec(vec![2.0, -2.0]), &DVector::from_vec(vec![0.5, 3.0])).unwrap();
        assert_eq!(v.as_slice(), &[1.5, 0.0]);
    }

    #[test]
    fn validation() {
        let b = DMatrix::identity(2, 2);
        let c = DVector::from_element(2, 1.0);
        let w = DVector::from_element(2, 1.0);
        assert!(WeightedProblem::new(b.clone(), c.clone(), w.clone(), 0.1).is_ok());
        assert!(WeightedProblem::new(b.clone(), c.clone(), w.clone(), 0.0).is_err());
        assert!(WeightedProblem::new(b.clone(), DVector::zeros(3), w.clone(), 0.1).is_err());
        assert!(WeightedProblem::new(b.clone(), c.clone(), DVector::from_vec(vec![1.0, 0.0]), 0.1).is_err());
        assert!(WeightedProblem::new(b, c, DVector::zeros(3), 0.1).is_err());
    }

    #[test]
    fn kkt_of_separable_solution_is_zero() {
        let p = WeightedProblem::new(
            DMatrix::identity(3, 3),
            DVector::from_vec(vec![2.0, -0.3, -1.5]),
            DVector::from_vec(vec![1.0, 1.0, 2.0]),
            0.5,
        )
        .unwrap();
        let x = DVector::from_vec(vec![1.5, 0.0, -0.5]);
        assert!(p.kkt_violation(&x) < 1e-15);
        assert!(p.kkt_violation(&DVector::zeros(3)) > 0.1);
        assert_eq!(support(&x, SUPPORT_REL_TOL), vec![0, 2]);
        assert!(support(&DVector::zeros(2), SUPPORT_REL_TOL).is_empty());
    }
}
